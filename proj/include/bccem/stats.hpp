#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "bccem/vecmath.hpp"

namespace bccem {

/// One-sample Kolmogorov-Smirnov statistic of `data` against the CDF `cdf`.
inline double ks_statistic(Vec data, const std::function<double(double)>& cdf) {
  if (data.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(data.begin(), data.end());
  const double n = static_cast<double>(data.size());
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = cdf(data[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

/// Asymptotic KS p-value Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)
/// with the usual finite-n effective lambda.
inline double ks_pvalue(std::size_t n, double d) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * lambda * lambda * k * k);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace detail {

// Regularized lower incomplete gamma P(a, x) (series for x < a+1, continued
// fraction otherwise).
inline double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Lentz continued fraction for Q(a, x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  const double q = std::exp(-x + a * std::log(x) - gln) * h;
  return 1.0 - q;
}

}  // namespace detail

/// Upper-tail chi-square p-value P(X >= x) with df degrees of freedom.
inline double chi2_pvalue(double x, int df) {
  if (df < 1) throw std::invalid_argument("chi2_pvalue: df must be >= 1");
  if (x <= 0.0) return 1.0;
  return 1.0 - detail::gamma_p(0.5 * df, 0.5 * x);
}

/// Pearson chi-square statistic for observed counts against uniform expected.
inline double chi2_uniform_statistic(const std::vector<std::size_t>& counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi2_uniform_statistic: need >= 2 bins");
  std::size_t total = 0;
  for (auto c : counts) total += c;
  const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  double x = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    x += d * d / expected;
  }
  return x;
}

inline double sample_mean(const Vec& xs) { return mean_of(xs); }

inline double sample_variance(const Vec& xs) {
  // biased (1/n) convention
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size());
}

inline double sample_stddev_unbiased(const Vec& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace bccem
