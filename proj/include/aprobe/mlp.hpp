#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Core>

namespace aprobe {

// One hidden ReLU layer feeding a single logit.
struct MlpProbe {
  Eigen::MatrixXd hidden_weights;  // hidden x k
  Eigen::VectorXd hidden_bias;     // hidden
  Eigen::VectorXd output_weights;  // hidden
  double output_bias = 0.0;
};

struct MlpOptions {
  int hidden_units = 128;
  int epochs = 500;
  int batch_size = 32;
  double learning_rate = 1e-3;
};

// Mini-batch Adam on the mean logistic loss. Deterministic given seed.
MlpProbe mlp_fit(const Eigen::MatrixXd& z, std::span<const int> labels, std::uint64_t seed,
                 const MlpOptions& options = {});

Eigen::VectorXd mlp_predict_logit(const MlpProbe& probe, const Eigen::MatrixXd& z);

}  // namespace aprobe
