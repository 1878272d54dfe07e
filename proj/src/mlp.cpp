#include "aprobe/mlp.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "aprobe/logistic.hpp"
#include "aprobe/random.hpp"

namespace aprobe {

namespace {

struct Adam {
  static constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double lr;
  long step = 0;

  template <typename Param, typename Grad, typename State>
  void update(Param& p, const Grad& g, State& m, State& v, double bias1, double bias2) const {
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + eps);
  }
};

}  // namespace

MlpProbe mlp_fit(const Eigen::MatrixXd& z, std::span<const int> labels, std::uint64_t seed,
                 const MlpOptions& options) {
  const auto n = static_cast<std::size_t>(z.rows());
  if (n != labels.size()) throw std::invalid_argument("mlp_fit: row/label count mismatch");
  bool has0 = false, has1 = false;
  for (int y : labels) (y == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw std::invalid_argument("mlp_fit: labels contain a single class");

  const Eigen::Index k = z.cols();
  const Eigen::Index h = options.hidden_units;
  Rng rng(seed);

  MlpProbe net;
  const double bound1 = std::sqrt(6.0 / static_cast<double>(k + h));
  const double bound2 = std::sqrt(6.0 / static_cast<double>(h + 1));
  net.hidden_weights.resize(h, k);
  for (Eigen::Index i = 0; i < net.hidden_weights.size(); ++i) net.hidden_weights.data()[i] = rng.uniform(-bound1, bound1);
  net.hidden_bias = Eigen::VectorXd::Zero(h);
  net.output_weights.resize(h);
  for (Eigen::Index i = 0; i < h; ++i) net.output_weights(i) = rng.uniform(-bound2, bound2);

  Eigen::MatrixXd m_w1 = Eigen::MatrixXd::Zero(h, k), v_w1 = m_w1;
  Eigen::VectorXd m_b1 = Eigen::VectorXd::Zero(h), v_b1 = m_b1, m_w2 = m_b1, v_w2 = m_b1;
  Eigen::VectorXd m_b2 = Eigen::VectorXd::Zero(1), v_b2 = m_b2;
  Adam adam{options.learning_rate};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(std::max(1, options.batch_size));

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const auto b = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd xb(b, k);
      Eigen::VectorXd yb(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        xb.row(i) = z.row(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(i)]));
        yb(i) = labels[order[start + static_cast<std::size_t>(i)]];
      }
      // forward
      Eigen::MatrixXd pre = (xb * net.hidden_weights.transpose()).rowwise() + net.hidden_bias.transpose();
      Eigen::MatrixXd act = pre.cwiseMax(0.0);
      Eigen::VectorXd logit = (act * net.output_weights).array() + net.output_bias;
      // d(mean loss)/d logit = sigmoid(logit) - y
      Eigen::VectorXd dlogit(b);
      for (Eigen::Index i = 0; i < b; ++i) dlogit(i) = (sigmoid(logit(i)) - yb(i)) / static_cast<double>(b);

      const Eigen::VectorXd g_w2 = act.transpose() * dlogit;
      Eigen::VectorXd g_b2(1);
      g_b2(0) = dlogit.sum();
      Eigen::MatrixXd dact = dlogit * net.output_weights.transpose();
      dact = dact.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
      const Eigen::MatrixXd g_w1 = dact.transpose() * xb;
      const Eigen::VectorXd g_b1 = dact.colwise().sum().transpose();

      ++adam.step;
      const double bias1 = 1.0 - std::pow(Adam::beta1, static_cast<double>(adam.step));
      const double bias2 = 1.0 - std::pow(Adam::beta2, static_cast<double>(adam.step));
      adam.update(net.hidden_weights, g_w1, m_w1, v_w1, bias1, bias2);
      adam.update(net.hidden_bias, g_b1, m_b1, v_b1, bias1, bias2);
      adam.update(net.output_weights, g_w2, m_w2, v_w2, bias1, bias2);
      Eigen::Map<Eigen::VectorXd> b2(&net.output_bias, 1);
      adam.update(b2, g_b2, m_b2, v_b2, bias1, bias2);
    }
  }
  return net;
}

Eigen::VectorXd mlp_predict_logit(const MlpProbe& probe, const Eigen::MatrixXd& z) {
  if (z.cols() != probe.hidden_weights.cols()) {
    throw std::invalid_argument("mlp_predict_logit: expected " + std::to_string(probe.hidden_weights.cols()) +
                                " columns, got " + std::to_string(z.cols()));
  }
  const Eigen::MatrixXd act = ((z * probe.hidden_weights.transpose()).rowwise() + probe.hidden_bias.transpose()).cwiseMax(0.0);
  return (act * probe.output_weights).array() + probe.output_bias;
}

}  // namespace aprobe
