// Serial reference vs OpenMP paths. Thread count comes from the benchmark
// argument; on a single-core host the parallel rows only measure overhead.

#include <benchmark/benchmark.h>

#include "aprobe/auc.hpp"
#include "aprobe/folds.hpp"
#include "aprobe/nested_cv.hpp"
#include "aprobe/random.hpp"
#include "aprobe/sweep.hpp"
#include "aprobe/synth.hpp"
#include "oracles.hpp"

using namespace aprobe;

namespace {

const Archive& fixture() {
  static const Archive a = [] {
    RegimeSpec s = regime_spec(Regime::precommit, 1);
    s.hidden_dim = 64;
    s.n_layers = 4;
    return generate_archive(s);
  }();
  return a;
}

void BM_SweepCells(benchmark::State& state) {
  const Archive& a = fixture();
  RunConfig c;
  c.workers = static_cast<int>(state.range(0));
  const auto plan = stratified_kfold(a.labels(), c.k_outer, c.seed);
  std::vector<CellKey> cells;
  for (int p : a.header.positions)
    for (std::size_t l = 0; l < a.header.n_layers; ++l) cells.push_back({p, l});
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_cells(a, c, plan, cells));
  state.counters["cells"] = static_cast<double>(cells.size());
}
BENCHMARK(BM_SweepCells)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_NestedCvFolds(benchmark::State& state) {
  const Archive& a = fixture();
  const Eigen::MatrixXd x = slice_cell(a.header, a.tensor, 0, 2);
  const auto y = a.labels();
  const auto plan = stratified_kfold(y, 5, 0);
  NestedCvOptions opt;
  opt.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nested_cv_probe(x, y, plan, opt));
}
BENCHMARK(BM_NestedCvFolds)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

std::pair<std::vector<double>, std::vector<int>> scores(std::size_t n) {
  Rng rng(3);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 3 == 0);
    s[i] = rng.normal() + y[i];
  }
  return {s, y};
}

void BM_AucRank(benchmark::State& state) {
  const auto [s, y] = scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(auc_roc(s, y));
}
BENCHMARK(BM_AucRank)->Arg(110)->Arg(552)->Arg(5000);

void BM_AucPairCount(benchmark::State& state) {
  const auto [s, y] = scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(oracle::pair_count_auc(s, y));
}
BENCHMARK(BM_AucPairCount)->Arg(110)->Arg(552)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
