#pragma once

#include <cstdint>
#include <vector>

#include "aprobe/canonical.hpp"

namespace aprobe {

struct CVResult {
  std::vector<double> fold_auc;
  std::vector<double> fold_C;  // NaN where no C applies (MLP, baselines)
  double mean_auc = 0.0;
  double std_auc = 0.0;  // population standard deviation over folds
  std::vector<std::uint64_t> fold_fingerprints;
  int nonconverged_fits = 0;

  void finalize();  // recompute mean/std from fold_auc
};

Json to_json(const CVResult& cv);
CVResult cv_result_from_json(const Json& j);

}  // namespace aprobe
