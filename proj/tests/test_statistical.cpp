// Monte Carlo statements about null data, checked on seeds 0..19 without
// selection. Registered as its own ctest entry.

#include <algorithm>

#include "aprobe/sweep.hpp"
#include "aprobe/synth.hpp"
#include "doctest.h"

using namespace aprobe;

TEST_SUITE("statistical") {
  TEST_CASE("noise archive: every cell within [0.4, 0.6]") {
    int held = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      RegimeSpec s = regime_spec(Regime::null, seed);
      s.n_examples = 400;
      s.hidden_dim = 8;
      s.n_layers = 3;
      RunConfig c;
      c.seed = seed;
      c.layer_policy = LayerPolicy::sweep_all;
      c.baselines = false;
      const auto r = temporal_sweep(generate_archive(s), c);
      CHECK(r.report.optimal_layer < 3);
      bool ok = true;
      for (const auto& [key, cv] : r.grid.cells) ok = ok && cv.mean_auc >= 0.4 && cv.mean_auc <= 0.6;
      CHECK_MESSAGE(ok, "seed ", seed);
      held += ok;
    }
    MESSAGE("noise archives with all cells in range: ", held, "/20");
  }

  TEST_CASE("null fixture: flat or non-significant, AUC within [0.45, 0.60]") {
    int held = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      RegimeSpec s = regime_spec(Regime::null, seed);
      s.n_examples = 550;
      s.hidden_dim = 32;
      s.n_layers = 1;
      s.signal_layer = 0;
      RunConfig c;
      c.seed = seed;
      c.baselines = false;
      const auto r = temporal_sweep(generate_archive(s), c);
      bool ok = r.report.temporal->pattern == Pattern::flat || r.report.temporal->p_value >= 0.05;
      for (const auto& cv : r.grid.at_optimal) ok = ok && cv.mean_auc >= 0.45 && cv.mean_auc <= 0.60;
      CHECK_MESSAGE(ok, "seed ", seed, " delta ", r.report.temporal->delta, " p ", r.report.temporal->p_value);
      held += ok;
    }
    MESSAGE("null fixtures meeting the statement: ", held, "/20");
  }
}
