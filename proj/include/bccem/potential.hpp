#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "bccem/vecmath.hpp"

namespace bccem {

/// Strictly convex potential of a regular exponential family, exposed on both
/// sides of the Legendre transform:
///
///   value / grad            cumulant Psi and the map  grad Psi : natural -> mean
///   conj_value / conj_grad  conjugate Psi* and        grad Psi* : mean -> natural
///   conj_hessian_diag       diag of hess Psi* (all families here are
///                           coordinate-separable on the sampled block)
///
/// Convention: additive constants (the (1/2)*log(2*pi) terms of the Gaussian
/// cumulant) are dropped from Psi, and Psi* is the exact Legendre conjugate of
/// that normalized Psi. Divergences, likelihood rankings and the Fenchel
/// identity Psi(theta) + Psi*(eta) = <theta, eta> at matched points are all
/// unaffected by the dropped constant.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual int dim() const = 0;
  virtual const char* name() const = 0;

  virtual double value(const Vec& theta) const = 0;
  virtual Vec grad(const Vec& theta) const = 0;
  virtual double conj_value(const Vec& eta) const = 0;
  virtual Vec conj_grad(const Vec& eta) const = 0;
  virtual Vec conj_hessian_diag(const Vec& eta) const = 0;

  virtual bool in_domain(const Vec& theta) const {
    return static_cast<int>(theta.size()) == dim() && all_finite(theta);
  }
  virtual bool in_conj_domain(const Vec& eta) const {
    return static_cast<int>(eta.size()) == dim() && all_finite(eta);
  }

 protected:
  void check_domain(const Vec& theta) const {
    if (static_cast<int>(theta.size()) != dim())
      throw std::invalid_argument(std::string(name()) + ": dimension mismatch");
    if (!in_domain(theta))
      throw std::domain_error(std::string(name()) + ": point outside natural domain");
  }
  void check_conj_domain(const Vec& eta) const {
    if (static_cast<int>(eta.size()) != dim())
      throw std::invalid_argument(std::string(name()) + ": dimension mismatch");
    if (!in_conj_domain(eta))
      throw std::domain_error(std::string(name()) + ": point outside mean domain");
  }
};

/// Diagonal quadratic potential Psi(x) = (1/2) * sum_i a_i x_i^2 with a_i > 0.
///
/// Two roles:
///   - fixed-variance diagonal Gaussian in natural coordinates (a_i = sigma_i^2,
///     so theta_i = mu_i / sigma_i^2, eta_i = mu_i, hess Psi* = diag(1/sigma_i^2));
///   - plain squared-norm geometry F(x) = ||x||^2 (a_i = 2), under which the
///     information radius reduces to the sample variance.
class DiagQuadraticPotential final : public Potential {
 public:
  explicit DiagQuadraticPotential(Vec coeffs) : a_(std::move(coeffs)) {
    for (double c : a_)
      if (!(c > 0.0) || !std::isfinite(c))
        throw std::invalid_argument("DiagQuadraticPotential: coefficients must be positive");
  }

  int dim() const override { return static_cast<int>(a_.size()); }
  const char* name() const override { return "diag_quadratic"; }
  const Vec& coeffs() const { return a_; }

  double value(const Vec& theta) const override {
    check_domain(theta);
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += a_[i] * theta[i] * theta[i];
    return 0.5 * s;
  }
  Vec grad(const Vec& theta) const override {
    check_domain(theta);
    Vec g(theta.size());
    for (int i = 0; i < dim(); ++i) g[i] = a_[i] * theta[i];
    return g;
  }
  double conj_value(const Vec& eta) const override {
    check_conj_domain(eta);
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += eta[i] * eta[i] / a_[i];
    return 0.5 * s;
  }
  Vec conj_grad(const Vec& eta) const override {
    check_conj_domain(eta);
    Vec g(eta.size());
    for (int i = 0; i < dim(); ++i) g[i] = eta[i] / a_[i];
    return g;
  }
  Vec conj_hessian_diag(const Vec& eta) const override {
    check_conj_domain(eta);
    Vec h(eta.size());
    for (int i = 0; i < dim(); ++i) h[i] = 1.0 / a_[i];
    return h;
  }

 private:
  Vec a_;
};

/// Fixed-variance diagonal Gaussian cumulant, Psi(theta) = (1/2) sum sigma_i^2 theta_i^2.
inline DiagQuadraticPotential fixed_variance_gaussian(Vec sigma2) {
  return DiagQuadraticPotential(std::move(sigma2));
}

/// F(x) = ||x||_2^2 (a_i = 2). The classic quadratic-geometry special case.
inline DiagQuadraticPotential squared_norm_potential(int dim) {
  return DiagQuadraticPotential(Vec(static_cast<std::size_t>(dim), 2.0));
}

/// Non-quadratic test potential Psi(theta) = sum_i exp(theta_i) (Poisson-style
/// cumulant). Mean domain is the positive orthant, which makes it the natural
/// fixture for curved-geometry and domain-exit behavior:
///   grad Psi = exp(theta), Psi*(eta) = sum eta_i log eta_i - eta_i,
///   grad Psi* = log(eta), hess Psi* = diag(1/eta_i),
///   D_{Psi*}(x||y) = sum x_i log(x_i/y_i) - x_i + y_i (generalized KL).
class ExpPotential final : public Potential {
 public:
  explicit ExpPotential(int dim) : dim_(dim) {
    if (dim <= 0) throw std::invalid_argument("ExpPotential: dim must be positive");
  }

  int dim() const override { return dim_; }
  const char* name() const override { return "exp_sum"; }

  double value(const Vec& theta) const override {
    check_domain(theta);
    double s = 0.0;
    for (double t : theta) s += std::exp(t);
    return s;
  }
  Vec grad(const Vec& theta) const override {
    check_domain(theta);
    Vec g(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) g[i] = std::exp(theta[i]);
    return g;
  }
  double conj_value(const Vec& eta) const override {
    check_conj_domain(eta);
    double s = 0.0;
    for (double e : eta) s += e * std::log(e) - e;
    return s;
  }
  Vec conj_grad(const Vec& eta) const override {
    check_conj_domain(eta);
    Vec g(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) g[i] = std::log(eta[i]);
    return g;
  }
  Vec conj_hessian_diag(const Vec& eta) const override {
    check_conj_domain(eta);
    Vec h(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) h[i] = 1.0 / eta[i];
    return h;
  }
  bool in_conj_domain(const Vec& eta) const override {
    if (static_cast<int>(eta.size()) != dim_ || !all_finite(eta)) return false;
    for (double e : eta)
      if (!(e > 0.0)) return false;
    return true;
  }

 private:
  int dim_;
};

/// Full diagonal Gaussian family with both mean and variance adapting.
///
/// Coordinates are packed blocks of length d: theta = [theta1; theta2] with
/// theta1_i = mu_i / sigma_i^2, theta2_i = -1/(2 sigma_i^2) (theta2 < 0), and
/// eta = [eta1; eta2] with eta1_i = mu_i, eta2_i = mu_i^2 + sigma_i^2.
///
///   Psi(theta)  = sum_i [ -theta1_i^2 / (4 theta2_i) - (1/2) log(-2 theta2_i) ]
///   Psi*(eta)   = sum_i [ -(1/2) log(eta2_i - eta1_i^2) - 1/2 ]
///
/// This family exists for divergence and coordinate round-trip work; the
/// centroid / trust-region machinery operates on the mean block of a frozen
/// variance geometry instead. Its conjugate Hessian is block-diagonal rather
/// than diagonal, so conj_hessian_diag is not provided.
class FullDiagGaussianPotential final : public Potential {
 public:
  explicit FullDiagGaussianPotential(int d) : d_(d) {
    if (d <= 0) throw std::invalid_argument("FullDiagGaussianPotential: d must be positive");
  }

  int dim() const override { return 2 * d_; }
  int base_dim() const { return d_; }
  const char* name() const override { return "full_diag_gaussian"; }

  double value(const Vec& theta) const override {
    check_domain(theta);
    double s = 0.0;
    for (int i = 0; i < d_; ++i) {
      const double t1 = theta[i], t2 = theta[d_ + i];
      s += -t1 * t1 / (4.0 * t2) - 0.5 * std::log(-2.0 * t2);
    }
    return s;
  }
  Vec grad(const Vec& theta) const override {
    check_domain(theta);
    Vec g(theta.size());
    for (int i = 0; i < d_; ++i) {
      const double t1 = theta[i], t2 = theta[d_ + i];
      const double mu = -t1 / (2.0 * t2);
      const double var = -1.0 / (2.0 * t2);
      g[i] = mu;
      g[d_ + i] = mu * mu + var;
    }
    return g;
  }
  double conj_value(const Vec& eta) const override {
    check_conj_domain(eta);
    double s = 0.0;
    for (int i = 0; i < d_; ++i) {
      const double var = eta[d_ + i] - eta[i] * eta[i];
      s += -0.5 * std::log(var) - 0.5;
    }
    return s;
  }
  Vec conj_grad(const Vec& eta) const override {
    check_conj_domain(eta);
    Vec g(eta.size());
    for (int i = 0; i < d_; ++i) {
      const double mu = eta[i];
      const double var = eta[d_ + i] - mu * mu;
      g[i] = mu / var;
      g[d_ + i] = -0.5 / var;
    }
    return g;
  }
  Vec conj_hessian_diag(const Vec&) const override {
    throw std::logic_error(
        "full_diag_gaussian: conjugate Hessian is block-diagonal, no diagonal form");
  }
  bool in_domain(const Vec& theta) const override {
    if (static_cast<int>(theta.size()) != dim() || !all_finite(theta)) return false;
    for (int i = 0; i < d_; ++i)
      if (!(theta[d_ + i] < 0.0)) return false;
    return true;
  }
  bool in_conj_domain(const Vec& eta) const override {
    if (static_cast<int>(eta.size()) != dim() || !all_finite(eta)) return false;
    for (int i = 0; i < d_; ++i)
      if (!(eta[d_ + i] - eta[i] * eta[i] > 0.0)) return false;
    return true;
  }

 private:
  int d_;
};

/// Bregman divergence D_F(x||y) = F(x) - F(y) - <x - y, grad F(y)>.
/// Nonnegative by convexity; tiny negative round-off is clamped to zero.
inline double bregman_divergence(const Potential& F, const Vec& x, const Vec& y) {
  require_same_dim(x, y, "bregman_divergence");
  const double d = F.value(x) - F.value(y) - dot(axpy(x, -1.0, y), F.grad(y));
  return d > 0.0 ? d : 0.0;
}

/// Dual-side divergence D_{Psi*}(x||y) over mean coordinates. Satisfies
/// D_Psi(theta||theta') = D_{Psi*}(grad Psi(theta') || grad Psi(theta)).
inline double conjugate_bregman_divergence(const Potential& F, const Vec& x, const Vec& y) {
  require_same_dim(x, y, "conjugate_bregman_divergence");
  const double d = F.conj_value(x) - F.conj_value(y) - dot(axpy(x, -1.0, y), F.conj_grad(y));
  return d > 0.0 ? d : 0.0;
}

/// grad Psi : natural -> mean coordinates.
inline Vec natural_to_mean(const Potential& F, const Vec& theta) { return F.grad(theta); }

/// (grad Psi)^{-1} = grad Psi* : mean -> natural coordinates.
inline Vec mean_to_natural(const Potential& F, const Vec& eta) { return F.conj_grad(eta); }

/// Per-sample log-likelihood l(theta; x) = <theta, x> - Psi(theta), with x a
/// sufficient-statistic (mean-coordinate) point. Constants follow the
/// potential's normalization.
inline double log_likelihood(const Potential& F, const Vec& theta, const Vec& x) {
  require_same_dim(theta, x, "log_likelihood");
  return dot(theta, x) - F.value(theta);
}

}  // namespace bccem
