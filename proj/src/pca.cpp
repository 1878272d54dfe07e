#include "aprobe/pca.hpp"

#include <Eigen/SVD>
#include <stdexcept>
#include <string>

namespace aprobe {

namespace {
// Cumulative sums carry rounding error; a ratio within this of the
// threshold counts as reaching it (matters for threshold = 1).
constexpr double kRatioSlack = 1e-12;
}  // namespace

std::size_t minimal_component_count(std::span<const double> eigenvalues, double threshold) {
  if (eigenvalues.empty()) throw std::invalid_argument("no eigenvalues");
  double total = 0.0;
  for (double v : eigenvalues) total += v;
  if (total <= 0.0) return 1;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    cumulative += eigenvalues[k];
    if (cumulative / total >= threshold - kRatioSlack) return k + 1;
  }
  return eigenvalues.size();
}

Eigen::MatrixXd PcaModel::projection() const {
  if (!whiten) return components;
  Eigen::MatrixXd p = components;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double var = explained_variance(i);
    if (var > 0.0) p.row(i) /= std::sqrt(var);
  }
  return p;
}

PcaModel pca_fit(const Eigen::MatrixXd& x, double threshold, bool whiten) {
  if (x.rows() < 2) throw std::invalid_argument("pca_fit: need at least 2 rows, got " + std::to_string(x.rows()));
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("pca_fit: threshold must be in (0, 1]");
  }
  const double denom = static_cast<double>(x.rows() - 1);

  PcaModel model;
  model.variance_threshold = threshold;
  model.whiten = whiten;
  model.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centred = x.rowwise() - model.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinV);
  const Eigen::VectorXd eig = svd.singularValues().array().square() / denom;
  model.total_variance = eig.sum();

  const std::size_t k = minimal_component_count(std::span<const double>(eig.data(), eig.size()), threshold);
  const auto kk = static_cast<Eigen::Index>(k);
  model.components = svd.matrixV().leftCols(kk).transpose();
  model.explained_variance = eig.head(kk);

  for (Eigen::Index i = 0; i < kk; ++i) {
    Eigen::Index arg = 0;
    model.components.row(i).cwiseAbs().maxCoeff(&arg);
    if (model.components(i, arg) < 0.0) model.components.row(i) *= -1.0;
  }
  return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != model.input_dim()) {
    throw std::invalid_argument("pca_transform: expected " + std::to_string(model.input_dim()) + " columns, got " +
                                std::to_string(x.cols()));
  }
  return (x.rowwise() - model.mean.transpose()) * model.projection().transpose();
}

}  // namespace aprobe
