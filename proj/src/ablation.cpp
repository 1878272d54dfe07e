#include "aprobe/ablation.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <stdexcept>

namespace aprobe {

AblationKind parse_ablation(const std::string& name) {
  if (name == "probe_type") return AblationKind::probe_type;
  if (name == "pca_threshold") return AblationKind::pca_threshold;
  if (name == "C_sweep" || name == "c_sweep") return AblationKind::C_sweep;
  if (name == "layer_agg") return AblationKind::layer_agg;
  throw std::invalid_argument("unknown ablation '" + name + "' (expected probe_type, pca_threshold, C_sweep, layer_agg)");
}

std::string to_string(AblationKind kind) {
  switch (kind) {
    case AblationKind::probe_type: return "probe_type";
    case AblationKind::pca_threshold: return "pca_threshold";
    case AblationKind::C_sweep: return "C_sweep";
    case AblationKind::layer_agg: return "layer_agg";
  }
  return "probe_type";
}

Archive aggregate_layers(const Archive& archive, LayerAggregation how) {
  const auto& h = archive.header;
  const std::size_t n = h.n_examples, np = h.positions.size(), nl = h.n_layers, d = h.hidden_dim;
  Archive out;
  out.header = h;
  out.header.n_layers = 1;
  out.header.hidden_dim = how == LayerAggregation::concat ? nl * d : d;
  out.header.extras["layer_aggregation"] = how == LayerAggregation::concat ? "concat" : "mean";
  out.records = archive.records;
  out.tensor = ActivationTensor(n, np, 1, out.header.hidden_dim);
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t p = 0; p < np; ++p) {
      auto dst = out.tensor.row(e, p, 0);
      for (std::size_t l = 0; l < nl; ++l) {
        const auto src = archive.tensor.row(e, p, l);
        if (how == LayerAggregation::concat) {
          std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(l * d));
        } else {
          for (std::size_t j = 0; j < d; ++j) dst[j] += src[j] / static_cast<float>(nl);
        }
      }
    }
  }
  return out;
}

AblationReport run_ablation(const Archive& archive, const RunConfig& config, AblationKind kind, SweepStats* stats) {
  AblationReport report;
  report.kind = kind;
  auto add = [&](std::string name, const ModelReport& r) { report.variants.push_back({std::move(name), r}); };

  switch (kind) {
    case AblationKind::probe_type: {
      const SweepResult logistic = temporal_sweep(archive, config, {}, stats);
      add("logistic", logistic.report);
      RunConfig fixed = config;
      fixed.layer_policy = LayerPolicy::fixed;
      fixed.fixed_layer = logistic.grid.optimal_layer;
      add("mlp", temporal_sweep(archive, fixed, {ProbeKind::mlp, "mlp"}, stats).report);
      break;
    }
    case AblationKind::pca_threshold: {
      for (double t : kAblationThresholds) {
        RunConfig c = config;
        c.pca_threshold = t;
        add(fmt::format("pca_threshold={:.2f}", t), temporal_sweep(archive, c, {}, stats).report);
      }
      break;
    }
    case AblationKind::C_sweep: {
      for (double C : config.C_grid) {
        RunConfig c = config;
        c.C_grid = {C};
        add(fmt::format("C={:g}", C), temporal_sweep(archive, c, {}, stats).report);
      }
      break;
    }
    case AblationKind::layer_agg: {
      add("single", temporal_sweep(archive, config, {}, stats).report);
      RunConfig one = config;
      one.layer_policy = LayerPolicy::fixed;
      one.fixed_layer = 0;
      add("concat", temporal_sweep(aggregate_layers(archive, LayerAggregation::concat), one,
                                   {ProbeKind::logistic, "layer_agg:concat"}, stats)
                        .report);
      add("mean", temporal_sweep(aggregate_layers(archive, LayerAggregation::mean), one,
                                 {ProbeKind::logistic, "layer_agg:mean"}, stats)
                      .report);
      break;
    }
  }

  double lo = 1.0, hi = 0.0;
  const TemporalStats* first = nullptr;
  for (const auto& v : report.variants) {
    lo = std::min(lo, v.report.probe_auc);
    hi = std::max(hi, v.report.probe_auc);
    if (!v.report.temporal) continue;
    if (!first) first = &*v.report.temporal;
    else if (v.report.temporal->pattern != first->pattern) report.pattern_invariant = false;
  }
  report.auc_spread = report.variants.empty() ? 0.0 : hi - lo;
  return report;
}

Json to_json(const AblationReport& report) {
  Json variants = Json::array();
  for (const auto& v : report.variants) variants.push_back(Json{{"name", v.name}, {"report", to_json(v.report)}});
  return Json{{"kind", "ablation_report"},
              {"ablation", to_string(report.kind)},
              {"variants", std::move(variants)},
              {"auc_spread", number_to_json(report.auc_spread)},
              {"pattern_invariant", report.pattern_invariant}};
}

}  // namespace aprobe
