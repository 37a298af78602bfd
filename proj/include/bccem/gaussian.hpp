#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "bccem/rng.hpp"
#include "bccem/vecmath.hpp"

namespace bccem {

/// Diagonal Gaussian carried in mean/variance form, with conversions to and
/// from the full family's natural coordinates (packed [theta1; theta2],
/// theta1_i = mu_i / sigma_i^2, theta2_i = -1/(2 sigma_i^2)).
///
/// Every variance entry is floored at kVarianceFloor on construction and
/// update so the natural coordinates stay finite when a CEM population
/// collapses.
struct DiagGaussian {
  static constexpr double kVarianceFloor = 1e-6;

  Vec mean;
  Vec variance;
  bool variance_frozen = false;

  DiagGaussian(Vec mu, Vec sigma2, bool frozen = false)
      : mean(std::move(mu)), variance(std::move(sigma2)), variance_frozen(frozen) {
    require_same_dim(mean, variance, "DiagGaussian");
    if (mean.empty()) throw std::invalid_argument("DiagGaussian: dim must be positive");
    if (!all_finite(mean) || !all_finite(variance))
      throw std::invalid_argument("DiagGaussian: non-finite parameter");
    for (double& v : variance) {
      if (v < 0.0) throw std::invalid_argument("DiagGaussian: variance must be nonnegative");
      v = std::max(v, kVarianceFloor);  // collapsed (zero/tiny) variances are floored
    }
  }

  DiagGaussian(const Vec& mu, double sigma2, bool frozen = false)
      : DiagGaussian(mu, Vec(mu.size(), sigma2), frozen) {}

  int dim() const { return static_cast<int>(mean.size()); }

  /// Natural coordinates of the full family, packed [theta1; theta2].
  Vec natural() const {
    Vec theta(2 * mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
      theta[i] = mean[i] / variance[i];
      theta[mean.size() + i] = -0.5 / variance[i];
    }
    return theta;
  }

  static DiagGaussian from_natural(const Vec& theta, bool frozen = false) {
    if (theta.empty() || theta.size() % 2 != 0)
      throw std::invalid_argument("DiagGaussian::from_natural: packed length must be 2d");
    const std::size_t d = theta.size() / 2;
    Vec mu(d), sigma2(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double t2 = theta[d + i];
      if (!(t2 < 0.0))
        throw std::domain_error("DiagGaussian::from_natural: theta2 must be negative");
      sigma2[i] = -0.5 / t2;
      mu[i] = theta[i] * sigma2[i];
    }
    return DiagGaussian(std::move(mu), std::move(sigma2), frozen);
  }

  /// One draw x = mean + sqrt(variance) * z, z ~ N(0, I).
  Vec sample(RngStream& rng) const {
    Vec x(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i)
      x[i] = mean[i] + std::sqrt(variance[i]) * rng.normal();
    return x;
  }
};

}  // namespace bccem
