#include <cmath>
#include <numeric>

#include "aprobe/auc.hpp"
#include "aprobe/direction.hpp"
#include "aprobe/logistic.hpp"
#include "aprobe/mlp.hpp"
#include "aprobe/model_io.hpp"
#include "aprobe/pca.hpp"
#include "aprobe/random.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace aprobe;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.normal();
  return x;
}

std::vector<int> random_labels(Rng& rng, std::size_t n) {
  std::vector<int> y(n);
  do {
    for (auto& v : y) v = rng.bernoulli(0.5) ? 1 : 0;
  } while (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0);
  return y;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("pca: single varying axis") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(6, 3, 2.0);
  for (int i = 0; i < 6; ++i) x(i, 0) = i - 2.5;
  const auto m = pca_fit(x, 0.95);
  REQUIRE(m.n_components() == 1);
  CHECK(m.components(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(m.components(0, 1)) < 1e-12);
  CHECK(std::abs(m.components(0, 2)) < 1e-12);
}

TEST_CASE("pca: diagonal covariance") {
  // Four points with sample covariance diag(2, 1) exactly.
  const double a = std::sqrt(3.0);
  const double b = std::sqrt(1.5);
  Eigen::MatrixXd x(4, 2);
  x << a, 0, -a, 0, 0, b, 0, -b;
  const auto m = pca_fit(x, 0.6);
  REQUIRE(m.n_components() == 1);
  CHECK(m.explained_variance(0) / m.total_variance == doctest::Approx(2.0 / 3.0));
  CHECK(m.explained_variance(0) == doctest::Approx(2.0));
}

TEST_CASE("pca: contract on random matrices") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.below(40));
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.below(30));
    Eigen::MatrixXd x = random_matrix(rng, n, d);
    // uneven scales so thresholds bite
    for (Eigen::Index j = 0; j < d; ++j) x.col(j) *= 1.0 + 3.0 * rng.uniform();
    const double threshold = rng.uniform(0.5, 0.99);
    const auto m = pca_fit(x, threshold);
    const auto k = static_cast<Eigen::Index>(m.n_components());

    const Eigen::MatrixXd gram = m.components * m.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(k, k)).lpNorm<Eigen::Infinity>() <= 1e-10);

    const double cum_k = m.explained_variance.sum() / m.total_variance;
    const double cum_km1 = m.explained_variance.head(k - 1).sum() / m.total_variance;
    CHECK(cum_k >= threshold - 1e-12);
    CHECK(cum_km1 < threshold);

    const Eigen::VectorXd var = oracle::column_variance(pca_transform(m, x));
    CHECK((var - m.explained_variance).lpNorm<Eigen::Infinity>() <= 1e-8 * std::max(1.0, var.maxCoeff()));
    CHECK(m.total_variance == doctest::Approx(oracle::column_variance(x).sum()));
  }
}

TEST_CASE("pca: k is non-decreasing in the threshold") {
  Rng rng(8);
  const Eigen::MatrixXd x = random_matrix(rng, 60, 25);
  std::size_t prev = 0;
  for (double t : {0.85, 0.90, 0.95, 0.99}) {
    const auto k = pca_fit(x, t).n_components();
    CHECK(k >= prev);
    prev = k;
  }
}

TEST_CASE("pca: transform identities") {
  Rng rng(9);
  const Eigen::MatrixXd x = random_matrix(rng, 30, 6);
  const auto m = pca_fit(x, 1.0);
  REQUIRE(m.n_components() == 6);
  const Eigen::MatrixXd mean_row = m.mean.transpose();
  CHECK(pca_transform(m, mean_row).norm() < 1e-12);
  const Eigen::MatrixXd z = pca_transform(m, x);
  const Eigen::MatrixXd back = (z * m.components).rowwise() + m.mean.transpose();
  CHECK((back - x).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("pca: whitening gives unit variances") {
  Rng rng(10);
  Eigen::MatrixXd x = random_matrix(rng, 50, 5);
  x.col(0) *= 4.0;
  const auto m = pca_fit(x, 0.99, true);
  const Eigen::VectorXd var = oracle::column_variance(pca_transform(m, x));
  for (Eigen::Index i = 0; i < var.size(); ++i) CHECK(var(i) == doctest::Approx(1.0));
}

TEST_CASE("pca: rejects bad input") {
  CHECK_THROWS(pca_fit(Eigen::MatrixXd::Ones(1, 3), 0.9));
  CHECK_THROWS(pca_fit(Eigen::MatrixXd::Ones(3, 3), 0.0));
  CHECK_THROWS(pca_fit(Eigen::MatrixXd::Ones(3, 3), 1.5));
}

TEST_CASE("logistic: separable 1-D") {
  Eigen::MatrixXd z(2, 1);
  z << -1, 1;
  const std::vector<int> y = {0, 1};
  const auto p = logistic_fit(z, y, 10.0);
  CHECK(p.converged);
  CHECK(p.weights(0) > 0.0);
  CHECK(auc_roc(to_vec(predict_logit(p, z)), y) == 1.0);
  Eigen::MatrixXd plus(1, 1);
  plus << 1.0;
  CHECK(predict_logit(p, plus)(0) > 0.0);
}

TEST_CASE("logistic: zero parameters give probability one half") {
  LogisticProbe p;
  p.weights = Eigen::VectorXd::Zero(3);
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 3);
  CHECK(predict_logit(p, z)(0) == 0.0);
  CHECK(sigmoid(0.0) == 0.5);
}

TEST_CASE("logistic: agrees with a gradient-descent oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd z = random_matrix(rng, 20, 3);
    const auto y = random_labels(rng, 20);
    const double C = trial % 2 ? 1.0 : 0.3;
    const auto fit = logistic_fit(z, y, C);
    const auto ref = oracle::gradient_descent_logistic(z, y, C, 1e-12);
    REQUIRE(ref.grad_norm <= 1e-12);
    Eigen::VectorXd diff(4);
    diff << fit.weights - ref.w, fit.bias - ref.b;
    CHECK(diff.norm() <= 1e-4);
    CHECK(fit.converged);
  }
}

TEST_CASE("logistic: gradient matches central differences") {
  Rng rng(12);
  const Eigen::MatrixXd z = random_matrix(rng, 25, 4);
  const auto y = random_labels(rng, 25);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd w(4);
    for (int i = 0; i < 4; ++i) w(i) = rng.normal();
    const double b = rng.normal();
    Eigen::VectorXd gw;
    double gb = 0.0;
    logistic_objective(z, y, 2.0, w, b, &gw, &gb);
    const double h = 1e-6;
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd wp = w, wm = w;
      wp(i) += h;
      wm(i) -= h;
      const double fd = (logistic_objective(z, y, 2.0, wp, b) - logistic_objective(z, y, 2.0, wm, b)) / (2 * h);
      CHECK(std::abs(fd - gw(i)) <= 1e-5 * std::max(1.0, std::abs(gw(i))));
    }
    const double fd = (logistic_objective(z, y, 2.0, w, b + h) - logistic_objective(z, y, 2.0, w, b - h)) / (2 * h);
    CHECK(std::abs(fd - gb) <= 1e-5 * std::max(1.0, std::abs(gb)));
  }
}

TEST_CASE("logistic: common column scale with C / s^2 leaves logits unchanged") {
  // w' = w / s and C' = C / s^2 turn the objective into (1/s^2) times the original.
  Rng rng(13);
  const Eigen::MatrixXd z = random_matrix(rng, 40, 3);
  const auto y = random_labels(rng, 40);
  LogisticOptions tight;
  tight.tolerance = 1e-12;
  for (double s : {0.25, 3.0, 10.0}) {
    const auto a = logistic_fit(z, y, 1.0, tight);
    const auto b = logistic_fit(z * s, y, 1.0 / (s * s), tight);
    CHECK((predict_logit(a, z) - predict_logit(b, z * s)).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK((b.weights * s - a.weights).norm() <= 1e-8);
  }
}

TEST_CASE("logistic: rejects bad input") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(4, 2);
  CHECK_THROWS(logistic_fit(z, std::vector<int>{1, 1, 1, 1}, 1.0));
  CHECK_THROWS(logistic_fit(z, std::vector<int>{0, 1, 0, 1}, 0.0));
  CHECK_THROWS(logistic_fit(z, std::vector<int>{0, 2, 0, 1}, 1.0));
}

TEST_CASE("logistic: shuffled labels give chance training AUC") {
  Rng rng(14);
  double total = 0.0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    const Eigen::MatrixXd z = random_matrix(rng, 200, 2);
    const auto y = random_labels(rng, 200);
    const auto p = logistic_fit(z, y, 1.0);
    total += auc_roc(to_vec(predict_logit(p, z)), y);
  }
  CHECK(std::abs(total / seeds - 0.5) <= 0.1);
}

TEST_CASE("mlp: learns XOR where a linear probe cannot") {
  Rng rng(15);
  const double corners[4][2] = {{-1, -1}, {1, 1}, {-1, 1}, {1, -1}};
  Eigen::MatrixXd z(400, 2);
  std::vector<int> y(400);
  for (int i = 0; i < 400; ++i) {
    const int c = i % 4;
    z(i, 0) = corners[c][0] + 0.1 * rng.normal();
    z(i, 1) = corners[c][1] + 0.1 * rng.normal();
    y[i] = c < 2 ? 1 : 0;
  }
  MlpOptions opt;
  opt.epochs = 100;
  const auto mlp = mlp_fit(z, y, 1, opt);
  CHECK(auc_roc(to_vec(mlp_predict_logit(mlp, z)), y) > 0.95);
  const auto lin = logistic_fit(z, y, 1.0);
  CHECK(std::abs(auc_roc(to_vec(predict_logit(lin, z)), y) - 0.5) < 0.1);
}

TEST_CASE("mlp: deterministic per seed") {
  Rng rng(16);
  const Eigen::MatrixXd z = random_matrix(rng, 64, 3);
  const auto y = random_labels(rng, 64);
  MlpOptions opt;
  opt.epochs = 5;
  opt.hidden_units = 8;
  const auto a = mlp_fit(z, y, 99, opt);
  const auto b = mlp_fit(z, y, 99, opt);
  const auto c = mlp_fit(z, y, 100, opt);
  CHECK(a.hidden_weights == b.hidden_weights);
  CHECK(a.output_weights == b.output_weights);
  CHECK(a.output_bias == b.output_bias);
  CHECK(a.hidden_weights != c.hidden_weights);
}

TEST_CASE("mlp: shuffled labels stay near chance out of sample") {
  Rng rng(17);
  const Eigen::MatrixXd train = random_matrix(rng, 200, 4);
  const Eigen::MatrixXd test = random_matrix(rng, 400, 4);
  const auto y_train = random_labels(rng, 200);
  const auto y_test = random_labels(rng, 400);
  MlpOptions opt;
  opt.epochs = 20;
  const auto m = mlp_fit(train, y_train, 3, opt);
  CHECK(std::abs(auc_roc(to_vec(mlp_predict_logit(m, test)), y_test) - 0.5) < 0.1);
}

TEST_CASE("direction: identity components") {
  PcaModel pca;
  pca.mean = Eigen::VectorXd::Zero(2);
  pca.components = Eigen::MatrixXd::Identity(2, 2);
  pca.explained_variance = Eigen::VectorXd::Ones(2);
  LogisticProbe probe;
  probe.weights = Eigen::Vector2d(3, 4);
  const Eigen::VectorXd d = probe_direction(probe, pca);
  CHECK(d(0) == doctest::Approx(0.6));
  CHECK(d(1) == doctest::Approx(0.8));
  probe.weights.setZero();
  CHECK_THROWS(probe_direction(probe, pca));
}

TEST_CASE("direction: raw logit equals the probe logit on transformed input") {
  Rng rng(18);
  for (bool whiten : {false, true}) {
    const Eigen::MatrixXd x = random_matrix(rng, 60, 10);
    const auto y = random_labels(rng, 60);
    const auto pca = pca_fit(x, 0.9, whiten);
    const auto probe = logistic_fit(pca_transform(pca, x), y, 1.0);
    const Eigen::MatrixXd held = random_matrix(rng, 15, 10);
    const Eigen::VectorXd via_pca = predict_logit(probe, pca_transform(pca, held));
    CHECK((raw_logit(probe, pca, held) - via_pca).lpNorm<Eigen::Infinity>() < 1e-9);
    // moving along the direction by alpha shifts the logit by alpha * |P^T w|
    const Eigen::VectorXd v = raw_weights(probe, pca);
    const Eigen::VectorXd d = probe_direction(probe, pca);
    const Eigen::MatrixXd moved = held.rowwise() + 0.7 * d.transpose();
    const Eigen::VectorXd shift = raw_logit(probe, pca, moved) - raw_logit(probe, pca, held);
    for (Eigen::Index i = 0; i < shift.size(); ++i) CHECK(shift(i) == doctest::Approx(0.7 * v.norm()));
  }
}

TEST_CASE("model_io: round trip and fingerprints") {
  Rng rng(19);
  const Eigen::MatrixXd x = random_matrix(rng, 30, 5);
  const auto y = random_labels(rng, 30);
  const auto pca = pca_fit(x, 0.9);
  const auto probe = logistic_fit(pca_transform(pca, x), y, 0.1);
  const auto pca2 = pca_from_json(to_json(pca));
  const auto probe2 = probe_from_json(to_json(probe));
  CHECK(pca2.components == pca.components);
  CHECK(probe2.weights == probe.weights);
  CHECK(fingerprint(pca2) == fingerprint(pca));
  CHECK(fingerprint(probe2) == fingerprint(probe));
  auto probe3 = probe;
  probe3.bias = std::nextafter(probe3.bias, 1e9);
  CHECK(fingerprint(probe3) != fingerprint(probe));
}
