#pragma once

#include <span>
#include <string>
#include <utility>

namespace aprobe {

// Regularised incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

// P(T <= t) for Student's t with `df` degrees of freedom.
double student_t_cdf(double t, double df);

struct TTestResult {
  double mean_diff = 0.0;
  double t = 0.0;
  double p = 1.0;
  bool degenerate_variance = false;  // sd(d) = 0 with mean(d) != 0
};

// Two-sided paired test on d = b - a with len - 1 degrees of freedom.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

enum class Pattern { pos0_peak, late_peak, flat };
enum class Tier { star, dagger, none };

inline constexpr double kFlatDelta = 0.005;

Pattern classify_pattern(double delta);
Tier significance_tier(double p);
std::pair<Pattern, Tier> classify_pattern(double delta, double p);

std::string to_string(Pattern pattern);  // pos0_peak / late_peak / flat
std::string to_string(Tier tier);        // star / dagger / none
std::string display_name(Pattern pattern);  // "Pos-0 peak" / "Late-peak" / "Flat"
std::string marker(Tier tier);              // "*" / "†" / ""
Pattern parse_pattern(const std::string& text);
Tier parse_tier(const std::string& text);

struct TemporalStats {
  double delta = 0.0;  // AUC(pos 4) - AUC(pos 0)
  double t_statistic = 0.0;
  double p_value = 1.0;
  bool degenerate_variance = false;
  Pattern pattern = Pattern::flat;
  Tier tier = Tier::none;
};

TemporalStats temporal_stats(std::span<const double> pos0_fold_auc, std::span<const double> pos4_fold_auc);

}  // namespace aprobe
