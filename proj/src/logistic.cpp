#include "aprobe/logistic.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

namespace aprobe {

namespace {

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

void check_inputs(const Eigen::MatrixXd& z, std::span<const int> labels, double C) {
  if (static_cast<std::size_t>(z.rows()) != labels.size()) {
    throw std::invalid_argument("logistic_fit: " + std::to_string(z.rows()) + " rows but " +
                                std::to_string(labels.size()) + " labels");
  }
  if (!(C > 0.0)) throw std::invalid_argument("logistic_fit: C must be positive");
  bool has0 = false, has1 = false;
  for (int y : labels) {
    if (y == 1) has1 = true;
    else if (y == 0) has0 = true;
    else throw std::invalid_argument("logistic_fit: labels must be 0 or 1");
  }
  if (!has0 || !has1) throw std::invalid_argument("logistic_fit: labels contain a single class");
}

// theta = [w; b]
class Objective {
 public:
  Objective(const Eigen::MatrixXd& z, std::span<const int> labels, double C) : z_(z), C_(C), sign_(labels.size()) {
    for (std::size_t i = 0; i < labels.size(); ++i) sign_(static_cast<Eigen::Index>(i)) = labels[i] == 1 ? 1.0 : -1.0;
  }

  Eigen::Index dim() const { return z_.cols() + 1; }

  double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
    const Eigen::Index k = z_.cols();
    const auto w = theta.head(k);
    const double b = theta(k);
    const Eigen::VectorXd margin = (z_ * w).array() + b;
    Eigen::VectorXd r(margin.size());
    double loss = 0.0;
    for (Eigen::Index i = 0; i < margin.size(); ++i) {
      const double t = -sign_(i) * margin(i);
      loss += softplus(t);
      r(i) = -sign_(i) * sigmoid(t);
    }
    grad.resize(k + 1);
    grad.head(k) = w + C_ * (z_.transpose() * r);
    grad(k) = C_ * r.sum();
    return 0.5 * w.squaredNorm() + C_ * loss;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const {
    const Eigen::Index k = z_.cols();
    const Eigen::VectorXd margin = (z_ * theta.head(k)).array() + theta(k);
    Eigen::VectorXd d(margin.size());
    for (Eigen::Index i = 0; i < margin.size(); ++i) {
      const double s = sigmoid(margin(i));
      d(i) = C_ * s * (1.0 - s);
    }
    Eigen::MatrixXd h(k + 1, k + 1);
    const Eigen::MatrixXd dz = d.asDiagonal() * z_;
    h.topLeftCorner(k, k) = z_.transpose() * dz;
    h.topLeftCorner(k, k).diagonal().array() += 1.0;
    h.topRightCorner(k, 1) = dz.colwise().sum().transpose();
    h.bottomLeftCorner(1, k) = h.topRightCorner(k, 1).transpose();
    h(k, k) = d.sum();
    return h;
  }

 private:
  const Eigen::MatrixXd& z_;
  double C_;
  Eigen::VectorXd sign_;
};

struct Point {
  Eigen::VectorXd theta;
  double f = 0.0;
  Eigen::VectorXd grad;
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Minimiser of the cubic through (a, fa, da), (b, fb, db), clamped into the
// interval; falls back to bisection when the fit is degenerate.
double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  const double lo = std::min(a, b), hi = std::max(a, b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
    const double margin = 0.1 * (hi - lo);
    if (std::isfinite(t) && t > lo + margin && t < hi - margin) return t;
  }
  return 0.5 * (a + b);
}

// Strong-Wolfe line search along `dir`. Returns false when no acceptable
// step was found; `out` then holds the best decreasing point if any.
bool line_search(const Objective& obj, const Point& start, const Eigen::VectorXd& dir, double alpha0, Point& out,
                 int& evaluations) {
  constexpr double c1 = 1e-4, c2 = 0.9;
  const double dphi0 = start.grad.dot(dir);
  if (!(dphi0 < 0.0)) return false;

  struct Sample {
    double alpha, f, dphi;
    Point point;
  };
  auto eval = [&](double alpha) {
    Sample s{alpha, 0.0, 0.0, {}};
    s.point.theta = start.theta + alpha * dir;
    s.f = obj(s.point.theta, s.point.grad);
    s.point.f = s.f;
    s.dphi = s.point.grad.dot(dir);
    ++evaluations;
    return s;
  };
  bool have_best = false;
  auto keep_best = [&](const Sample& s) {
    if (s.f < start.f && (!have_best || s.f < out.f)) {
      out = s.point;
      have_best = true;
    }
  };

  auto zoom = [&](Sample lo, Sample hi) -> bool {
    for (int iter = 0; iter < 40; ++iter) {
      if (std::abs(hi.alpha - lo.alpha) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
      const double a = cubic_step(lo.alpha, lo.f, lo.dphi, hi.alpha, hi.f, hi.dphi);
      Sample s = eval(a);
      keep_best(s);
      if (s.f > start.f + c1 * a * dphi0 || s.f >= lo.f) {
        hi = std::move(s);
      } else {
        if (std::abs(s.dphi) <= -c2 * dphi0) {
          out = std::move(s.point);
          return true;
        }
        if (s.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(s);
      }
    }
    return false;
  };

  Sample prev{0.0, start.f, dphi0, start};
  double alpha = alpha0;
  for (int iter = 0; iter < 40; ++iter) {
    Sample s = eval(alpha);
    keep_best(s);
    if (!std::isfinite(s.f) || s.f > start.f + c1 * alpha * dphi0 || (iter > 0 && s.f >= prev.f)) {
      if (!std::isfinite(s.f)) {
        alpha = 0.5 * (prev.alpha + alpha);
        continue;
      }
      return zoom(std::move(prev), std::move(s));
    }
    if (std::abs(s.dphi) <= -c2 * dphi0) {
      out = std::move(s.point);
      return true;
    }
    if (s.dphi >= 0.0) return zoom(std::move(s), std::move(prev));
    prev = std::move(s);
    alpha *= 2.0;
  }
  return false;
}

}  // namespace

double logistic_objective(const Eigen::MatrixXd& z, std::span<const int> labels, double C,
                          const Eigen::VectorXd& weights, double bias, Eigen::VectorXd* grad_weights,
                          double* grad_bias) {
  check_inputs(z, labels, C);
  if (weights.size() != z.cols()) throw std::invalid_argument("logistic_objective: weight dimension mismatch");
  Objective obj(z, labels, C);
  Eigen::VectorXd theta(z.cols() + 1);
  theta << weights, bias;
  Eigen::VectorXd grad;
  const double f = obj(theta, grad);
  if (grad_weights) *grad_weights = grad.head(z.cols());
  if (grad_bias) *grad_bias = grad(z.cols());
  return f;
}

LogisticProbe logistic_fit(const Eigen::MatrixXd& z, std::span<const int> labels, double C,
                           const LogisticOptions& options, const LogisticProbe* warm_start) {
  check_inputs(z, labels, C);
  const Objective obj(z, labels, C);
  const Eigen::Index k = z.cols();

  Point x;
  x.theta = Eigen::VectorXd::Zero(k + 1);
  if (warm_start && warm_start->weights.size() == k) {
    x.theta.head(k) = warm_start->weights;
    x.theta(k) = warm_start->bias;
  }
  x.f = obj(x.theta, x.grad);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  int iterations = 0;
  int evaluations = 0;
  bool stalled = false;

  while (iterations < options.max_iterations && inf_norm(x.grad) > options.tolerance) {
    // two-loop recursion
    Eigen::VectorXd q = x.grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd dir = -q;
    if (!(x.grad.dot(dir) < 0.0)) {
      dir = -x.grad;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / x.grad.norm()) : 1.0;

    Point next;
    const bool ok = line_search(obj, x, dir, alpha0, next, evaluations);
    ++iterations;
    if (!ok) {
      if (next.theta.size() == 0) {
        stalled = true;
        break;
      }
    }
    Eigen::VectorXd s = next.theta - x.theta;
    Eigen::VectorXd y = next.grad - x.grad;
    const double sy = s.dot(y);
    x = std::move(next);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (!ok) {
      stalled = true;
      break;
    }
  }

  // Near the optimum the objective's rounding floor can defeat the Wolfe
  // test; Newton steps converge quadratically from here.
  if (stalled) {
    while (iterations < options.max_iterations && inf_norm(x.grad) > options.tolerance) {
      ++iterations;
      const Eigen::MatrixXd h = obj.hessian(x.theta);
      const Eigen::VectorXd dir = h.ldlt().solve(-x.grad);
      if (!dir.allFinite()) break;
      const double g0 = inf_norm(x.grad);
      double step = 1.0;
      bool moved = false;
      for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
        Point trial;
        trial.theta = x.theta + step * dir;
        trial.f = obj(trial.theta, trial.grad);
        const bool decrease = trial.f <= x.f + 1e-4 * step * x.grad.dot(dir);
        const bool flat = trial.f <= x.f + 1e-13 * std::abs(x.f) && inf_norm(trial.grad) < g0;
        if (decrease || flat) {
          x = std::move(trial);
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
  }

  LogisticProbe probe;
  probe.weights = x.theta.head(k);
  probe.bias = x.theta(k);
  probe.C = C;
  probe.iterations = iterations;
  probe.gradient_norm = inf_norm(x.grad);
  probe.converged = probe.gradient_norm <= options.tolerance;
  return probe;
}

Eigen::VectorXd predict_logit(const LogisticProbe& probe, const Eigen::MatrixXd& z) {
  if (z.cols() != probe.weights.size()) {
    throw std::invalid_argument("predict_logit: expected " + std::to_string(probe.weights.size()) + " columns, got " +
                                std::to_string(z.cols()));
  }
  return (z * probe.weights).array() + probe.bias;
}

}  // namespace aprobe
