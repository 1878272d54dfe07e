#pragma once

#include <span>

namespace aprobe {

// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
// (positive, negative) pairs where the positive scores higher, ties 0.5.
// O(n log n) via mid-ranks.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

}  // namespace aprobe
