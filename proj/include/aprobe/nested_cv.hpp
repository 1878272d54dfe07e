#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aprobe/cv_result.hpp"
#include "aprobe/folds.hpp"
#include "aprobe/logistic.hpp"
#include "aprobe/mlp.hpp"
#include "aprobe/pca.hpp"

namespace aprobe {

inline const std::vector<double> kDefaultCGrid = {0.001, 0.01, 0.1, 1.0, 10.0};

enum class ProbeKind { logistic, mlp };

struct NestedCvOptions {
  std::vector<double> C_grid = kDefaultCGrid;
  double pca_threshold = 0.95;
  bool whiten = false;
  std::size_t inner_k = 3;
  // Refit PCA inside each inner training split (otherwise the outer-training
  // PCA is reused for C selection).
  bool inner_pca_refit = true;
  ProbeKind probe = ProbeKind::logistic;
  // Seeds inner fold plans; combined with the outer fold index so cells
  // evaluated on the same outer plan share inner plans too.
  std::uint64_t seed = 0;
  std::uint64_t model_seed = 0;  // MLP initialisation/shuffling
  LogisticOptions logistic;
  MlpOptions mlp;
  bool leakage_check = true;
  int workers = 1;  // folds evaluated concurrently when > 1
};

struct FoldModel {
  PcaModel pca;
  LogisticProbe probe;
  std::optional<MlpProbe> mlp;
};

class LeakageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FoldError : public std::runtime_error {
 public:
  FoldError(std::size_t fold, const std::string& what)
      : std::runtime_error("fold " + std::to_string(fold) + ": " + what), fold_(fold) {}
  std::size_t fold() const { return fold_; }

 private:
  std::size_t fold_;
};

// Rows of the training split that also occur verbatim in the test split.
std::vector<std::size_t> shared_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> train,
                                     std::span<const std::size_t> test);

// Chooses C by inner stratified CV on the training rows; returns the grid
// index of the first C with the highest mean inner AUC.
std::size_t select_C(const Eigen::MatrixXd& x_train_raw, std::span<const int> y_train, const PcaModel& outer_pca,
                     const NestedCvOptions& options, std::uint64_t inner_seed, int& nonconverged);

// For each outer fold: PCA fitted on the training rows, C chosen by inner CV,
// probe refitted at that C, test rows scored. Test rows never reach a fit.
CVResult nested_cv_probe(const Eigen::MatrixXd& x_raw, std::span<const int> labels, const FoldPlan& outer,
                         const NestedCvOptions& options, std::vector<FoldModel>* fitted = nullptr);

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows);
std::vector<int> take(std::span<const int> values, std::span<const std::size_t> rows);

}  // namespace aprobe
