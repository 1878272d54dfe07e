#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aprobe/archive.hpp"
#include "aprobe/config.hpp"
#include "aprobe/cv_result.hpp"
#include "aprobe/folds.hpp"
#include "aprobe/scoring.hpp"
#include "aprobe/ttest.hpp"

namespace aprobe {

struct CellKey {
  int position = 0;
  std::size_t layer = 0;
  auto operator<=>(const CellKey&) const = default;
};

class CellError : public std::runtime_error {
 public:
  CellError(CellKey cell, const std::string& what)
      : std::runtime_error("position " + std::to_string(cell.position) + " layer " + std::to_string(cell.layer) +
                           ": " + what),
        cell_(cell) {}
  CellKey cell() const { return cell_; }

 private:
  CellKey cell_;
};

struct SweepOptions {
  ProbeKind probe = ProbeKind::logistic;
  // Distinguishes checkpoint entries of otherwise identical cells
  // (e.g. ablation variants over derived archives).
  std::string variant;
};

struct SweepStats {
  std::size_t computed = 0;
  std::size_t loaded = 0;
};

struct SweepGrid {
  std::vector<int> positions;
  std::size_t n_layers = 0;
  std::map<CellKey, CVResult> cells;  // every evaluated (position, layer)
  std::size_t optimal_layer = 0;
  std::vector<CVResult> at_optimal;   // per position, at optimal_layer
};

struct ModelReport {
  std::string model_name;
  std::string params;
  AccuracyTable accuracy;
  std::size_t n_layers = 0;
  std::size_t optimal_layer = 0;
  double depth = 0.0;      // optimal_layer / n_layers
  double layer_auc = 0.0;  // position-0 mean AUC at the optimal layer
  std::optional<double> pos0_auc;
  std::optional<double> pos4_auc;
  double probe_auc = 0.0;  // best mean AUC across positions at the optimal layer
  int best_position = 0;
  std::optional<TemporalStats> temporal;  // needs positions 0 and 4
  std::optional<CVResult> baseline_confidence;
  std::optional<CVResult> baseline_entropy;
  int nonconverged_fits = 0;
  std::string fold_plan_fingerprint;
};

struct SweepResult {
  ModelReport report;
  SweepGrid grid;
  FoldPlan plan;
};

// Content hash over labels, shape and activations.
std::uint64_t archive_fingerprint(const Archive& archive);

// Nested CV for each requested cell on one shared outer plan. Cells are
// independent work items, spread over `config.workers` threads.
std::vector<CVResult> evaluate_cells(const Archive& archive, const RunConfig& config, const FoldPlan& plan,
                                     std::span<const CellKey> cells, const SweepOptions& options = {},
                                     SweepStats* stats = nullptr);

// Layer with the highest position-0 mean AUC; ties go to the shallower layer.
std::size_t select_optimal_layer(const Archive& archive, const RunConfig& config, const SweepOptions& options = {},
                                 SweepStats* stats = nullptr);

SweepResult temporal_sweep(const Archive& archive, const RunConfig& config, const SweepOptions& options = {},
                           SweepStats* stats = nullptr);

Json to_json(const ModelReport& report);
ModelReport model_report_from_json(const Json& j);
Json to_json(const SweepGrid& grid);

// Results file written by `sweep`: report, grid, fold plan and config.
Json sweep_result_json(const SweepResult& result, const RunConfig& config, const std::string& archive_path);

}  // namespace aprobe
