#pragma once

#include <string>
#include <vector>

#include "aprobe/archive.hpp"
#include "aprobe/config.hpp"
#include "aprobe/sweep.hpp"

namespace aprobe {

enum class AblationKind { probe_type, pca_threshold, C_sweep, layer_agg };

AblationKind parse_ablation(const std::string& name);
std::string to_string(AblationKind kind);

inline const std::vector<double> kAblationThresholds = {0.85, 0.90, 0.95, 0.99};

enum class LayerAggregation { concat, mean };

// Single-layer archive whose one layer is every layer concatenated along
// the hidden dimension, or their element-wise mean.
Archive aggregate_layers(const Archive& archive, LayerAggregation how);

struct AblationVariant {
  std::string name;
  ModelReport report;
};

struct AblationReport {
  AblationKind kind = AblationKind::probe_type;
  std::vector<AblationVariant> variants;
  double auc_spread = 0.0;  // max - min probe AUC over variants
  bool pattern_invariant = true;  // every variant with temporal stats has the same pattern
};

// probe_type:    logistic vs MLP at the logistic optimal layer
// pca_threshold: 0.85 / 0.90 / 0.95 / 0.99
// C_sweep:       each C of the configured grid held fixed
// layer_agg:     optimal single layer vs concatenated vs mean of all layers
AblationReport run_ablation(const Archive& archive, const RunConfig& config, AblationKind kind,
                            SweepStats* stats = nullptr);

Json to_json(const AblationReport& report);

}  // namespace aprobe
