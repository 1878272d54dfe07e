#include "aprobe/auc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace aprobe {

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc_roc: scores and labels differ in length");
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("auc_roc: labels must be 0 or 1");
    if (std::isnan(scores[i])) throw std::invalid_argument("auc_roc: NaN score");
    n_pos += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("auc_roc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the rank sum keeps mid-ranks integral.
  double twice_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // ranks i+1 .. j share the mid-rank (i + 1 + j) / 2
    std::size_t positives = 0;
    for (std::size_t t = i; t < j; ++t) positives += static_cast<std::size_t>(labels[order[t]]);
    twice_rank_sum += static_cast<double>(positives) * static_cast<double>(i + 1 + j);
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double twice_u = twice_rank_sum - np * (np + 1.0);
  return twice_u / (2.0 * np * static_cast<double>(n_neg));
}

}  // namespace aprobe
