#include <cmath>

#include "aprobe/folds.hpp"
#include "aprobe/nested_cv.hpp"
#include "aprobe/random.hpp"
#include "doctest.h"

using namespace aprobe;

namespace {

struct Data {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

// Positives shifted by d along the first axis.
Data planted(std::uint64_t seed, std::size_t n, std::size_t dim, double d) {
  Rng rng(seed);
  Data out{Eigen::MatrixXd(n, dim), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.y[i] = i % 3 == 0 ? 1 : 0;
    for (std::size_t j = 0; j < dim; ++j) out.x(i, j) = rng.normal();
    if (out.y[i]) out.x(i, 0) += d;
  }
  return out;
}

}  // namespace

TEST_CASE("nested cv: null data averages to chance") {
  double total = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const auto data = planted(100 + s, 90, 12, 0.0);
    const auto plan = stratified_kfold(data.y, 5, s);
    NestedCvOptions opt;
    opt.seed = s;
    total += nested_cv_probe(data.x, data.y, plan, opt).mean_auc;
  }
  const double mean = total / seeds;
  CHECK(mean >= 0.40);
  CHECK(mean <= 0.60);
}

TEST_CASE("nested cv: planted signal of size 2 is recovered") {
  const auto data = planted(5, 240, 20, 2.0);
  const auto plan = stratified_kfold(data.y, 5, 0);
  NestedCvOptions opt;
  const auto cv = nested_cv_probe(data.x, data.y, plan, opt);
  CHECK(cv.mean_auc > 0.85);
  CHECK(cv.fold_auc.size() == 5);
  CHECK(cv.fold_fingerprints.size() == 5);
  for (double c : cv.fold_C) CHECK(std::find(kDefaultCGrid.begin(), kDefaultCGrid.end(), c) != kDefaultCGrid.end());
}

TEST_CASE("nested cv: duplicated rows across train and test are rejected") {
  auto data = planted(6, 60, 5, 1.0);
  Eigen::MatrixXd doubled(120, 5);
  doubled << data.x, data.x;
  std::vector<int> y = data.y;
  y.insert(y.end(), data.y.begin(), data.y.end());
  const auto plan = stratified_kfold(y, 5, 0);
  CHECK_THROWS_AS(nested_cv_probe(doubled, y, plan, NestedCvOptions{}), LeakageError);

  const auto train = plan.train_indices(0);
  const auto test = plan.test_indices(0);
  CHECK_FALSE(shared_rows(doubled, train, test).empty());
}

TEST_CASE("nested cv: fold parameters ignore the test rows") {
  auto data = planted(7, 90, 8, 1.0);
  const auto plan = stratified_kfold(data.y, 5, 2);
  NestedCvOptions opt;
  const auto base = nested_cv_probe(data.x, data.y, plan, opt);
  Rng rng(1);
  for (std::size_t fold = 0; fold < 5; ++fold) {
    Eigen::MatrixXd perturbed = data.x;
    for (auto i : plan.test_indices(fold))
      for (Eigen::Index j = 0; j < perturbed.cols(); ++j) perturbed(static_cast<Eigen::Index>(i), j) = 50.0 * rng.normal();
    const auto cv = nested_cv_probe(perturbed, data.y, plan, opt);
    CHECK(cv.fold_fingerprints[fold] == base.fold_fingerprints[fold]);
  }
}

TEST_CASE("nested cv: parallel folds match serial") {
  auto data = planted(8, 90, 8, 0.8);
  const auto plan = stratified_kfold(data.y, 5, 3);
  NestedCvOptions serial;
  NestedCvOptions parallel;
  parallel.workers = 4;
  const auto a = nested_cv_probe(data.x, data.y, plan, serial);
  const auto b = nested_cv_probe(data.x, data.y, plan, parallel);
  CHECK(a.fold_auc == b.fold_auc);
  CHECK(a.fold_fingerprints == b.fold_fingerprints);
}

TEST_CASE("nested cv: MLP probe path") {
  auto data = planted(9, 90, 6, 2.0);
  const auto plan = stratified_kfold(data.y, 5, 0);
  NestedCvOptions opt;
  opt.probe = ProbeKind::mlp;
  opt.mlp.epochs = 200;
  opt.mlp.hidden_units = 16;
  std::vector<FoldModel> fitted;
  const auto cv = nested_cv_probe(data.x, data.y, plan, opt, &fitted);
  CHECK(cv.mean_auc > 0.75);
  REQUIRE(fitted.size() == 5);
  CHECK(fitted[0].mlp.has_value());
  CHECK(std::isnan(cv.fold_C[0]));
}
