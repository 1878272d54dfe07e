#include "aprobe/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "aprobe/random.hpp"

namespace aprobe {

namespace {

constexpr std::uint64_t kDirectionStream = 0x646972;
constexpr std::uint64_t kLabelStream = 0x6c6162;
constexpr std::uint64_t kTokenStream = 0x746f6b;
constexpr std::uint64_t kNoiseStream = 0x6e6f69;

double log_sigmoid(double s) { return s >= 0 ? -std::log1p(std::exp(-s)) : s - std::log1p(std::exp(s)); }
double softplus(double s) { return s >= 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::precommit: return "precommit";
    case Regime::late_peak: return "late_peak";
    case Regime::flat_informative: return "flat_informative";
    case Regime::null: return "null";
  }
  throw std::invalid_argument("bad regime");
}

Regime parse_regime(const std::string& text) {
  if (text == "precommit") return Regime::precommit;
  if (text == "late_peak") return Regime::late_peak;
  if (text == "flat_informative") return Regime::flat_informative;
  if (text == "null") return Regime::null;
  throw std::invalid_argument("unknown regime: " + text);
}

RegimeSpec regime_spec(Regime regime, std::uint64_t seed) {
  RegimeSpec spec;
  spec.regime = regime;
  spec.seed = seed;
  switch (regime) {
    case Regime::precommit: spec.effect_sizes = {1.0, 0.8, 0.6, 0.4, 0.2}; break;
    case Regime::late_peak: spec.effect_sizes = {0.2, 0.4, 0.6, 0.8, 1.0}; break;
    case Regime::flat_informative:
      spec.effect_sizes = {0.3, 0.3, 0.3, 0.3, 0.3};
      spec.confidence_effect = 1.0;
      break;
    case Regime::null:
      spec.effect_sizes = {0.0, 0.0, 0.0, 0.0, 0.0};
      spec.confidence_effect = 0.0;
      break;
  }
  return spec;
}

void check_spec(const RegimeSpec& spec) {
  if (spec.n_examples < 2) throw std::invalid_argument("synth: n_examples must be at least 2");
  if (spec.hidden_dim == 0 || spec.n_layers == 0) throw std::invalid_argument("synth: empty tensor shape");
  if (spec.signal_layer >= spec.n_layers) throw std::invalid_argument("synth: signal_layer out of range");
  if (!(spec.positive_rate > 0.0 && spec.positive_rate < 1.0)) {
    throw std::invalid_argument("synth: positive_rate must be in (0, 1)");
  }
  if (spec.positions.empty()) throw std::invalid_argument("synth: no positions");
  if (spec.effect_sizes.size() != spec.positions.size()) {
    throw std::invalid_argument("synth: effect_sizes length must equal the number of positions");
  }
  for (double d : spec.effect_sizes) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("synth: effect sizes must be finite and >= 0");
  }
  if (!(spec.confidence_effect >= 0.0)) throw std::invalid_argument("synth: confidence_effect must be >= 0");
}

std::vector<double> planted_direction(const RegimeSpec& spec) {
  Rng rng(mix_seed(spec.seed, kDirectionStream));
  std::vector<double> u(spec.hidden_dim);
  double norm2 = 0.0;
  for (auto& x : u) {
    x = rng.normal();
    norm2 += x * x;
  }
  const double norm = std::sqrt(norm2);
  for (auto& x : u) x /= norm;
  return u;
}

Archive generate_archive(const RegimeSpec& spec) {
  check_spec(spec);
  const std::size_t n = spec.n_examples;
  const std::size_t n_pos = spec.positions.size();

  Archive a;
  a.header.model_name = "synthetic:" + to_string(spec.regime) + ":" + std::to_string(spec.seed);
  a.header.n_layers = spec.n_layers;
  a.header.hidden_dim = spec.hidden_dim;
  a.header.positions = spec.positions;
  a.header.dtype = spec.dtype;
  a.header.n_examples = n;
  a.header.capture_point = "synthetic";

  // Labels are redrawn until both classes are present; the fold machinery
  // needs them and tiny specs can otherwise come out single-class.
  std::vector<int> labels(n);
  Rng label_rng(mix_seed(spec.seed, kLabelStream));
  for (;;) {
    std::size_t pos = 0;
    for (auto& y : labels) {
      y = label_rng.bernoulli(spec.positive_rate) ? 1 : 0;
      pos += static_cast<std::size_t>(y);
    }
    if (pos > 0 && pos < n) break;
  }

  Rng tok_rng(mix_seed(spec.seed, kTokenStream));
  a.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ExampleRecord r;
    r.example_id = "syn-" + std::to_string(i);
    r.dataset = Dataset::synthetic;
    r.question = "question " + std::to_string(i);
    r.generated_answer = "answer " + std::to_string(i);
    r.gold_answers = {labels[i] ? r.generated_answer : "gold " + std::to_string(i)};
    r.label = labels[i];
    // Mean log-prob is log sigmoid(s): geometric-mean confidence is monotone
    // in s, so its AUC is the Gaussian ceiling for confidence_effect.
    const double s = spec.confidence_effect * labels[i] + tok_rng.normal();
    const double mean_lp = log_sigmoid(s);
    const std::size_t n_tok = 1 + tok_rng.below(2);
    if (n_tok == 1) {
      r.token_logprobs = {mean_lp};
    } else {
      const double j = tok_rng.uniform(-0.5, 0.5);
      r.token_logprobs = {mean_lp * (1.0 + j), mean_lp * (1.0 - j)};
    }
    for (std::size_t t = 0; t < n_tok; ++t) {
      r.token_entropies.push_back(softplus(-s) * tok_rng.uniform(0.8, 1.2));
    }
    a.records.push_back(std::move(r));
  }

  const auto u = planted_direction(spec);
  a.tensor = ActivationTensor(n, n_pos, spec.n_layers, spec.hidden_dim);
  const double rho = spec.correlated_noise ? 0.5 : 0.0;
  const double own = std::sqrt(1.0 - rho);
  const double shared = std::sqrt(rho);
  std::vector<double> common(spec.hidden_dim);
  for (std::size_t e = 0; e < n; ++e) {
    Rng rng(mix_seed(spec.seed, kNoiseStream, e));
    for (std::size_t l = 0; l < spec.n_layers; ++l) {
      if (spec.correlated_noise) {
        for (auto& c : common) c = rng.normal();
      }
      for (std::size_t p = 0; p < n_pos; ++p) {
        const double shift = (l == spec.signal_layer && labels[e] == 1) ? spec.effect_sizes[p] : 0.0;
        auto row = a.tensor.row(e, p, l);
        for (std::size_t d = 0; d < spec.hidden_dim; ++d) {
          double x = own * rng.normal();
          if (spec.correlated_noise) x += shared * common[d];
          row[d] = static_cast<float>(x + shift * u[d]);
        }
      }
    }
  }
  return a;
}

double gaussian_auc(double d) { return 0.5 * std::erfc(-d / 2.0); }

}  // namespace aprobe
