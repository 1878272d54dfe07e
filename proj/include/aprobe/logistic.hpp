#pragma once

#include <cmath>
#include <span>

#include <Eigen/Core>

namespace aprobe {

struct LogisticProbe {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double C = 1.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;  // infinity norm at the returned point
};

struct LogisticOptions {
  double tolerance = 1e-8;  // on the gradient infinity norm
  int max_iterations = 10000;
  int memory = 10;
};

// Objective 0.5*|w|^2 + C * sum_i log(1 + exp(-s_i (w.z_i + b))) with
// s_i = +1 for label 1 and -1 for label 0; the bias is not penalised.
// Writes the gradient when the outputs are non-null.
double logistic_objective(const Eigen::MatrixXd& z, std::span<const int> labels, double C,
                          const Eigen::VectorXd& weights, double bias, Eigen::VectorXd* grad_weights = nullptr,
                          double* grad_bias = nullptr);

// L-BFGS with a strong-Wolfe line search, finished by damped Newton steps
// if the line search stalls before the tolerance is met.
LogisticProbe logistic_fit(const Eigen::MatrixXd& z, std::span<const int> labels, double C,
                           const LogisticOptions& options = {}, const LogisticProbe* warm_start = nullptr);

Eigen::VectorXd predict_logit(const LogisticProbe& probe, const Eigen::MatrixXd& z);

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace aprobe
