#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

namespace aprobe {

struct PcaModel {
  Eigen::VectorXd mean;                // d
  Eigen::MatrixXd components;          // k x d, orthonormal rows
  Eigen::VectorXd explained_variance;  // k, non-increasing
  double total_variance = 0.0;         // sum over all components, kept and dropped
  double variance_threshold = 0.95;
  bool whiten = false;

  std::size_t n_components() const { return static_cast<std::size_t>(components.rows()); }
  std::size_t input_dim() const { return static_cast<std::size_t>(components.cols()); }
  // Rows that map centred raw inputs to transformed coordinates
  // (components divided by sqrt(variance) when whitening).
  Eigen::MatrixXd projection() const;
};

// Smallest k with cumulative(eigenvalues[0..k)) / total >= threshold.
// `eigenvalues` must be sorted non-increasing.
std::size_t minimal_component_count(std::span<const double> eigenvalues, double threshold);

PcaModel pca_fit(const Eigen::MatrixXd& x, double threshold, bool whiten = false);

// (x - mean) * projection()^T
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x);

}  // namespace aprobe
