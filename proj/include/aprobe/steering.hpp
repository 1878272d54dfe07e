#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aprobe/archive.hpp"
#include "aprobe/logistic.hpp"
#include "aprobe/pca.hpp"

namespace aprobe {

inline constexpr char kSteeringMagic[8] = {'A', 'P', 'S', 'T', 'E', 'E', 'R', '\n'};
inline constexpr int kSteeringFormatVersion = 1;

enum class Orientation { toward_correct, toward_hallucination };

std::string to_string(Orientation orientation);
Orientation parse_orientation(const std::string& text);
Orientation flip(Orientation orientation);

struct SteeringVector {
  std::string model_name;
  std::size_t layer = 0;
  int position = 0;
  Eigen::VectorXd direction;  // unit norm, raw activation space
  std::vector<double> alpha_grid;
  Orientation orientation = Orientation::toward_correct;
  // Class scored by a positive probe logit. Probes here are fitted with
  // label 1 = correct, so this is "correct" unless a producer says otherwise.
  std::string probe_positive_class = "correct";
  // |projection^T w|: the probe-logit change per unit alpha along direction,
  // signed for the correct class (negative when steering toward hallucination).
  double expected_logit_shift = 0.0;
};

// direction = probe_direction(probe, pca), negated when it must point away
// from the probe's positive class.
SteeringVector export_steering(const LogisticProbe& probe, const PcaModel& pca, const std::string& model_name,
                               std::size_t layer, std::vector<double> alpha_grid, Orientation orientation);

// Same vector with orientation and direction negated.
SteeringVector flipped(const SteeringVector& v);

// File: magic, u32 LE header length, canonical-text header, f32 LE direction.
std::string encode_steering(const SteeringVector& v);
SteeringVector decode_steering(std::span<const char> bytes);
void write_steering(const SteeringVector& v, const std::filesystem::path& path);
SteeringVector read_steering(const std::filesystem::path& path);

// Mean over dimensions of the per-dimension standard deviation of
// position-0 activations at `layer`.
double mean_activation_sd(const Archive& archive, std::size_t layer);

// {-5, -2, -1, -0.5, 0.5, 1, 2, 5} * scale
std::vector<double> default_alpha_grid(double scale);

struct InterventionOutcome {
  std::string example_id;
  std::string answer_before;
  std::string answer_after;
  int label_before = 0;
  int label_after = 0;
};

// Pairs records by example_id; labels are re-scored from answers and golds.
std::vector<InterventionOutcome> intervention_outcomes(std::span<const ExampleRecord> before,
                                                       std::span<const ExampleRecord> after);

struct CorrectionStats {
  std::size_t n = 0;
  std::size_t incorrect_before = 0;
  std::size_t corrected = 0;  // 0 -> 1
  std::size_t correct_before = 0;
  std::size_t regressed = 0;  // 1 -> 0
  double correction_rate = 0.0;
  double regression_rate = 0.0;
};

CorrectionStats correction_rate(std::span<const InterventionOutcome> outcomes);
CorrectionStats correction_rate(std::span<const ExampleRecord> before, std::span<const ExampleRecord> after);

}  // namespace aprobe
