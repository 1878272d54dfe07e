#include "aprobe/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "aprobe/auc.hpp"

namespace aprobe {

ConfidenceMode parse_confidence_mode(const std::string& text) {
  if (text == "geometric_mean") return ConfidenceMode::geometric_mean;
  if (text == "product_over_length") return ConfidenceMode::product_over_length;
  throw std::invalid_argument("unknown confidence mode: " + text);
}

std::string to_string(ConfidenceMode mode) {
  return mode == ConfidenceMode::geometric_mean ? "geometric_mean" : "product_over_length";
}

double confidence_score(const ExampleRecord& record, ConfidenceMode mode) {
  if (record.token_logprobs.empty()) {
    throw std::invalid_argument("confidence_score: record " + record.example_id + " has no token log-probabilities");
  }
  double sum = 0.0;
  for (double lp : record.token_logprobs) sum += lp;
  const double len = static_cast<double>(record.token_logprobs.size());
  return mode == ConfidenceMode::geometric_mean ? std::exp(sum / len) : std::exp(sum) / len;
}

double entropy_score(const ExampleRecord& record) {
  if (record.token_entropies.empty()) {
    throw std::invalid_argument("entropy_score: record " + record.example_id + " has no token entropies");
  }
  double sum = 0.0;
  for (double h : record.token_entropies) sum += h;
  return sum / static_cast<double>(record.token_entropies.size());
}

CVResult baseline_auc(std::span<const ExampleRecord> records, Baseline which, const FoldPlan& folds,
                      ConfidenceMode mode) {
  if (folds.assignment.size() != records.size()) throw std::invalid_argument("baseline_auc: fold plan size mismatch");
  std::vector<double> score(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    score[i] = which == Baseline::confidence ? confidence_score(records[i], mode) : -entropy_score(records[i]);
  }
  CVResult cv;
  for (std::size_t f = 0; f < folds.k; ++f) {
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t i : folds.test_indices(f)) {
      s.push_back(score[i]);
      y.push_back(records[i].label);
    }
    cv.fold_auc.push_back(auc_roc(s, y));
    cv.fold_C.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  cv.finalize();
  return cv;
}

}  // namespace aprobe
