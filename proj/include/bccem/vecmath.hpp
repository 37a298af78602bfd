#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bccem {

using Vec = std::vector<double>;

inline void require_same_dim(const Vec& a, const Vec& b, const char* where) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

inline double dot(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

inline double sq_dist(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "sq_dist");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// a + t*v
inline Vec axpy(const Vec& a, double t, const Vec& v) {
  require_same_dim(a, v, "axpy");
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + t * v[i];
  return r;
}

inline bool all_finite(const Vec& a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double mean_of(const Vec& a) {
  if (a.empty()) throw std::invalid_argument("mean_of: empty vector");
  double s = 0.0;
  for (double x : a) s += x;
  return s / static_cast<double>(a.size());
}

inline Vec clamp_to(const Vec& x, const Vec& lo, const Vec& hi) {
  require_same_dim(x, lo, "clamp_to");
  require_same_dim(x, hi, "clamp_to");
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    r[i] = std::fmin(std::fmax(x[i], lo[i]), hi[i]);
  return r;
}

}  // namespace bccem
