#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aprobe/archive.hpp"

namespace aprobe {

enum class Regime { precommit, late_peak, flat_informative, null };

std::string to_string(Regime regime);
Regime parse_regime(const std::string& text);

struct RegimeSpec {
  Regime regime = Regime::precommit;
  std::size_t n_examples = 552;
  std::size_t hidden_dim = 512;
  std::size_t n_layers = 4;
  std::size_t signal_layer = 2;
  double positive_rate = 0.33;
  std::vector<int> positions{0, 1, 2, 3, 4};
  std::vector<double> effect_sizes;  // one per position
  double confidence_effect = 0.5;
  // Shares half the noise variance across positions of the same example and
  // layer. Breaks the closed-form AUC ceiling.
  bool correlated_noise = false;
  DType dtype = DType::f32;
  std::uint64_t seed = 0;
};

// Defaults for a regime: precommit d = (1.0, 0.8, 0.6, 0.4, 0.2),
// late_peak the reverse, flat_informative 0.3 everywhere with a stronger
// confidence channel, null all zeros.
RegimeSpec regime_spec(Regime regime, std::uint64_t seed = 0);

void check_spec(const RegimeSpec& spec);

// The unit direction u used for the planted shift; recomputable from the seed.
std::vector<double> planted_direction(const RegimeSpec& spec);

Archive generate_archive(const RegimeSpec& spec);

// AUC of a N(d, 1) vs N(0, 1) score: Phi(d / sqrt 2).
double gaussian_auc(double d);

}  // namespace aprobe
