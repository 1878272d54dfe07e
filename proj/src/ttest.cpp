#include "aprobe/ttest.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace aprobe {

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("incomplete_beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // the continued fraction converges fast for x < (a+1)/(a+b+2)
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("student_t_cdf: df must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0.0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("paired_t_test: need at least 2 pairs");
  const double n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += b[i] - a[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dev = (b[i] - a[i]) - mean;
    ss += dev * dev;
  }
  const double sd = std::sqrt(ss / (n - 1.0));

  TTestResult r;
  r.mean_diff = mean;
  if (sd == 0.0) {
    if (mean == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
      r.p = 0.0;
      r.degenerate_variance = true;
    }
    return r;
  }
  r.t = mean / (sd / std::sqrt(n));
  const double df = n - 1.0;
  r.p = std::min(1.0, incomplete_beta(0.5 * df, 0.5, df / (df + r.t * r.t)));
  return r;
}

Pattern classify_pattern(double delta) {
  // the slack keeps decimal inputs such as 0.005 on the flat side
  if (std::abs(delta) <= kFlatDelta + 1e-12) return Pattern::flat;
  return delta < 0.0 ? Pattern::pos0_peak : Pattern::late_peak;
}

Tier significance_tier(double p) {
  if (p < 0.05) return Tier::star;
  if (p < 0.10) return Tier::dagger;
  return Tier::none;
}

std::pair<Pattern, Tier> classify_pattern(double delta, double p) {
  return {classify_pattern(delta), significance_tier(p)};
}

std::string to_string(Pattern pattern) {
  switch (pattern) {
    case Pattern::pos0_peak: return "pos0_peak";
    case Pattern::late_peak: return "late_peak";
    case Pattern::flat: return "flat";
  }
  return "flat";
}

std::string to_string(Tier tier) {
  switch (tier) {
    case Tier::star: return "star";
    case Tier::dagger: return "dagger";
    case Tier::none: return "none";
  }
  return "none";
}

std::string display_name(Pattern pattern) {
  switch (pattern) {
    case Pattern::pos0_peak: return "Pos-0 peak";
    case Pattern::late_peak: return "Late-peak";
    case Pattern::flat: return "Flat";
  }
  return "Flat";
}

std::string marker(Tier tier) {
  switch (tier) {
    case Tier::star: return "*";
    case Tier::dagger: return "†";
    case Tier::none: return "";
  }
  return "";
}

Pattern parse_pattern(const std::string& text) {
  if (text == "pos0_peak") return Pattern::pos0_peak;
  if (text == "late_peak") return Pattern::late_peak;
  if (text == "flat") return Pattern::flat;
  throw std::invalid_argument("unknown pattern: " + text);
}

Tier parse_tier(const std::string& text) {
  if (text == "star") return Tier::star;
  if (text == "dagger") return Tier::dagger;
  if (text == "none") return Tier::none;
  throw std::invalid_argument("unknown tier: " + text);
}

TemporalStats temporal_stats(std::span<const double> pos0_fold_auc, std::span<const double> pos4_fold_auc) {
  const TTestResult t = paired_t_test(pos0_fold_auc, pos4_fold_auc);
  TemporalStats s;
  s.delta = t.mean_diff;
  s.t_statistic = t.t;
  s.p_value = t.p;
  s.degenerate_variance = t.degenerate_variance;
  s.pattern = classify_pattern(s.delta);
  s.tier = significance_tier(s.p_value);
  return s;
}

}  // namespace aprobe
