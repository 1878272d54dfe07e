#pragma once

#include <span>
#include <string>

#include "aprobe/archive.hpp"
#include "aprobe/cv_result.hpp"
#include "aprobe/folds.hpp"

namespace aprobe {

// How "product of token probabilities normalised by length" is read.
enum class ConfidenceMode {
  geometric_mean,       // exp(mean log p)
  product_over_length,  // exp(sum log p) / length
};

ConfidenceMode parse_confidence_mode(const std::string& text);
std::string to_string(ConfidenceMode mode);

double confidence_score(const ExampleRecord& record, ConfidenceMode mode = ConfidenceMode::geometric_mean);
// Mean per-token entropy in nats; higher predicts an incorrect answer.
double entropy_score(const ExampleRecord& record);

enum class Baseline { confidence, entropy };

// Per-fold AUC of an output-level score on each test fold; no fitting.
// Scores are oriented so that higher means "predicted correct".
CVResult baseline_auc(std::span<const ExampleRecord> records, Baseline which, const FoldPlan& folds,
                      ConfidenceMode mode = ConfidenceMode::geometric_mean);

}  // namespace aprobe
