#include "aprobe/direction.hpp"

#include <stdexcept>

namespace aprobe {

Eigen::VectorXd raw_weights(const LogisticProbe& probe, const PcaModel& pca) {
  if (static_cast<std::size_t>(probe.weights.size()) != pca.n_components()) {
    throw std::invalid_argument("probe was not fitted in this PCA space");
  }
  return pca.projection().transpose() * probe.weights;
}

Eigen::VectorXd probe_direction(const LogisticProbe& probe, const PcaModel& pca) {
  const Eigen::VectorXd v = raw_weights(probe, pca);
  const double norm = v.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("probe_direction: zero weight vector");
  return v / norm;
}

Eigen::VectorXd raw_logit(const LogisticProbe& probe, const PcaModel& pca, const Eigen::MatrixXd& raw) {
  return predict_logit(probe, pca_transform(pca, raw));
}

}  // namespace aprobe
