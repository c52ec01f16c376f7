#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>
#include <algorithm>

namespace wzgame {

namespace detail {

/// Continued fraction for the incomplete beta (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) return h;
  }
  throw std::runtime_error("incomplete beta: continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Student t cumulative distribution.
inline double t_cdf(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("t_cdf: df must be positive");
  if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0.0 ? 1.0 - tail : tail;
}

/// Inverse of t_cdf by bisection.
inline double t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("t_quantile: p outside (0, 1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -t_quantile(1.0 - p, df);
  double lo = 0.0, hi = 1.0;
  while (t_cdf(hi, df) < p) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (t_cdf(mid, df) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct SampleSummary {
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator
  std::size_t n = 0;
};

inline SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.n = values.size();
  if (s.n == 0) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

struct PairedTestResult {
  std::string metric;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double t_statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;  // two-sided
};

/// Paired t-test on d = a - b.
inline PairedTestResult paired_t_test(std::span<const double> a, std::span<const double> b,
                                      std::string metric = {}) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: samples differ in length");
  if (a.size() < 2) throw std::invalid_argument("paired_t_test: need at least 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const auto sd = summarize(d);
  PairedTestResult r;
  r.metric = std::move(metric);
  r.mean_a = summarize(a).mean;
  r.mean_b = summarize(b).mean;
  r.degrees_of_freedom = static_cast<int>(a.size()) - 1;
  if (sd.sd == 0.0) {
    r.t_statistic = sd.mean == 0.0 ? 0.0
                                   : std::copysign(std::numeric_limits<double>::infinity(), sd.mean);
    r.p_value = sd.mean == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t_statistic = sd.mean / (sd.sd / std::sqrt(static_cast<double>(sd.n)));
  r.p_value = std::min(1.0, 2.0 * t_cdf(-std::abs(r.t_statistic), r.degrees_of_freedom));
  return r;
}

/// One-sided p for the alternative mean(a - b) > 0.
inline double one_sided_p_greater(const PairedTestResult& r) {
  if (std::isinf(r.t_statistic)) return r.t_statistic > 0.0 ? 0.0 : 1.0;
  return 1.0 - t_cdf(r.t_statistic, r.degrees_of_freedom);
}

inline std::pair<double, double> confidence_interval_95(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("confidence_interval_95: need at least 2 values");
  const auto s = summarize(values);
  const double half = t_quantile(0.975, static_cast<double>(s.n - 1)) * s.sd / std::sqrt(static_cast<double>(s.n));
  return {s.mean - half, s.mean + half};
}

}  // namespace wzgame
