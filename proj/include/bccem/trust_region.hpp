#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "bccem/potential.hpp"
#include "bccem/rng.hpp"
#include "bccem/vecmath.hpp"

namespace bccem {

/// Bregman ball around the centroid in its dual (mean-space) characterization:
/// S = { eta : D_{Psi*}(center_eta || eta) <= radius }.
struct TrustRegion {
  Vec center_eta;
  double radius;  // Delta > 0
  const Potential* potential;

  TrustRegion(Vec center, double delta, const Potential& pot)
      : center_eta(std::move(center)), radius(delta), potential(&pot) {
    if (!(radius > 0.0)) throw std::invalid_argument("TrustRegion: radius must be positive");
    if (!pot.in_conj_domain(center_eta))
      throw std::domain_error("TrustRegion: center outside mean domain");
  }

  bool contains(const Vec& eta) const {
    return potential->in_conj_domain(eta) &&
           conjugate_bregman_divergence(*potential, center_eta, eta) <= radius * (1.0 + 1e-12);
  }
};

/// Thrown when a ray probe leaves the conjugate domain; carries the largest
/// feasible radius found along the ray.
struct DomainExitError : std::domain_error {
  double max_feasible_rho;
  DomainExitError(const std::string& msg, double rho)
      : std::domain_error(msg), max_feasible_rho(rho) {}
};

/// Direction uniform on the unit sphere S^{d-1} (Gaussian-normalize
/// construction). Degenerate zero draws are rejected and redrawn.
inline Vec uniform_sphere_direction(int dim, RngStream& rng) {
  if (dim < 1) throw std::invalid_argument("uniform_sphere_direction: dim must be >= 1");
  Vec v(static_cast<std::size_t>(dim));
  for (;;) {
    for (double& c : v) c = rng.normal();
    const double n = norm2(v);
    if (n > 1e-300) {
      for (double& c : v) c /= n;
      return v;
    }
  }
}

/// Radial Bregman divergence g_v(rho) = D_{Psi*}(eta_c || eta_c + rho * v);
/// g_v(0) = 0 and g_v is strictly increasing in rho.
inline double radial_divergence(const TrustRegion& tr, const Vec& v, double rho) {
  if (rho < 0.0) throw std::invalid_argument("radial_divergence: rho must be >= 0");
  const Vec eta = axpy(tr.center_eta, rho, v);
  if (!tr.potential->in_conj_domain(eta)) {
    // report the largest feasible rho along this ray (bisected to fp accuracy)
    double lo = 0.0, hi = rho;
    for (int i = 0; i < 80 && hi - lo > 1e-15 * (1.0 + hi); ++i) {
      const double mid = 0.5 * (lo + hi);
      if (tr.potential->in_conj_domain(axpy(tr.center_eta, mid, v)))
        lo = mid;
      else
        hi = mid;
    }
    throw DomainExitError("radial_divergence: ray left the mean domain", lo);
  }
  return conjugate_bregman_divergence(*tr.potential, tr.center_eta, eta);
}

namespace detail {

// Largest rho along v that stays strictly inside the conjugate domain,
// bisected between the last feasible and first infeasible probe.
inline double bisect_domain_boundary(const TrustRegion& tr, const Vec& v, double feasible,
                                     double infeasible) {
  double lo = feasible, hi = infeasible;
  for (int i = 0; i < 80 && hi - lo > 1e-14 * (1.0 + hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (tr.potential->in_conj_domain(axpy(tr.center_eta, mid, v)))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace detail

/// Root of g_v(rho) = Delta along direction v.
///
/// Bracketing starts at sqrt(2*Delta / hbar) (hbar = mean conjugate-Hessian
/// diagonal at the center, the quadratic-proxy scale) and doubles; the root is
/// then polished by a secant/bisection hybrid to |g - Delta| <= 1e-10*max(1,Delta),
/// capped at 200 iterations.
///
/// If the ray leaves the conjugate domain before g reaches Delta, the ball is
/// truncated by the domain and the largest feasible rho is returned. Failure
/// to bracket inside an open domain raises std::runtime_error (the caller may
/// resample a direction).
inline double exact_rho_max(const TrustRegion& tr, const Vec& v) {
  const double delta = tr.radius;
  const auto g = [&](double rho) {
    return conjugate_bregman_divergence(*tr.potential, tr.center_eta, axpy(tr.center_eta, rho, v));
  };
  const auto feasible = [&](double rho) {
    return tr.potential->in_conj_domain(axpy(tr.center_eta, rho, v));
  };

  double hbar = 1.0;
  try {
    hbar = mean_of(tr.potential->conj_hessian_diag(tr.center_eta));
  } catch (const std::logic_error&) {
    // no diagonal Hessian available; unit scale is only a starting guess
  }

  double lo = 0.0;
  double hi = std::sqrt(2.0 * delta / std::max(hbar, 1e-300));
  bool bracketed = false;
  for (int i = 0; i < 200; ++i) {
    if (!feasible(hi)) {
      const double boundary = detail::bisect_domain_boundary(tr, v, lo, hi);
      if (g(boundary) < delta) return boundary;  // ball truncated by the domain
      hi = boundary;
      bracketed = true;
      break;
    }
    if (g(hi) >= delta) {
      bracketed = true;
      break;
    }
    lo = hi;
    hi *= 2.0;
  }
  if (!bracketed)
    throw std::runtime_error("exact_rho_max: failed to bracket g(rho) = Delta");

  // secant/bisection hybrid on [lo, hi] with g(lo) < Delta <= g(hi);
  // converges from below so the returned rho always satisfies g(rho) <= Delta
  const double tol = 1e-10 * std::max(1.0, delta);
  double glo = g(lo) - delta;
  double ghi = g(hi) - delta;
  for (int i = 0; i < 200; ++i) {
    double cand = (ghi != glo) ? hi - ghi * (hi - lo) / (ghi - glo) : 0.5 * (lo + hi);
    if (!(cand > lo) || !(cand < hi)) cand = 0.5 * (lo + hi);
    const double gc = g(cand) - delta;
    if (gc <= 0.0) {
      lo = cand;
      glo = gc;
      if (-gc <= tol) return lo;
    } else {
      hi = cand;
      ghi = gc;
    }
  }
  return lo;
}

/// Exact trust-region draw: v ~ Unif(sphere), solve g_v(rho_max) = Delta,
/// return eta_c + u^{1/d} * rho_max * v with u ~ Unif[0,1).
/// The result is uniform on S (and uniform on the primal ball when Psi is
/// quadratic); membership D_{Psi*}(eta_c || eta_new) <= Delta always holds.
inline Vec exact_sample(const TrustRegion& tr, RngStream& rng) {
  const int d = static_cast<int>(tr.center_eta.size());
  const Vec v = uniform_sphere_direction(d, rng);
  const double rho_max = exact_rho_max(tr, v);
  const double u = rng.uniform01();
  return axpy(tr.center_eta, std::pow(u, 1.0 / d) * rho_max, v);
}

/// Closed-form proxy radius sqrt(2*Delta / (v^T H v)) for diagonal H.
inline double proxy_rho_max(const Vec& hess_diag, const Vec& v, double delta) {
  require_same_dim(hess_diag, v, "proxy_rho_max");
  if (!(delta > 0.0)) throw std::invalid_argument("proxy_rho_max: delta must be positive");
  double q = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(hess_diag[i] > 0.0))
      throw std::invalid_argument("proxy_rho_max: Hessian must be positive definite");
    q += hess_diag[i] * v[i] * v[i];
  }
  return std::sqrt(2.0 * delta / q);
}

/// Quadratic-proxy draw (ellipsoidal trust region): v ~ Unif(sphere),
/// rho_hat = sqrt(2*Delta/(v^T H v)), t ~ Unif[-rho_hat, rho_hat],
/// return eta_c + t*v. Always lies in the Mahalanobis ellipsoid
/// (eta - eta_c)^T H (eta - eta_c) <= 2*Delta.
///
/// Note the radial law differs from exact_sample's: t is uniform on the
/// segment, not volume-uniform (u^{1/d}); both laws are implemented exactly
/// as specified for their respective samplers.
inline Vec proxy_sample(const TrustRegion& tr, const Vec& hess_diag, RngStream& rng) {
  const int d = static_cast<int>(tr.center_eta.size());
  const Vec v = uniform_sphere_direction(d, rng);
  const double rho_hat = proxy_rho_max(hess_diag, v, tr.radius);
  const double t = rng.uniform(-rho_hat, rho_hat);
  return axpy(tr.center_eta, t, v);
}

/// Fixed-variance diagonal-Gaussian box draw: independent coordinate draws
/// eta_i ~ Unif[eta_c_i - sqrt(2*Delta*sigma_i^2), eta_c_i + sqrt(2*Delta*sigma_i^2)].
inline Vec diag_box_sample(const Vec& center_eta, double delta, const Vec& sigma2,
                           RngStream& rng) {
  require_same_dim(center_eta, sigma2, "diag_box_sample");
  if (!(delta > 0.0)) throw std::invalid_argument("diag_box_sample: delta must be positive");
  Vec eta(center_eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (!(sigma2[i] > 0.0))
      throw std::invalid_argument("diag_box_sample: variance must be positive");
    const double half = std::sqrt(2.0 * delta * sigma2[i]);
    eta[i] = rng.uniform(center_eta[i] - half, center_eta[i] + half);
  }
  return eta;
}

enum class SamplerKind { Exact, Proxy, DiagBox };

/// Sampler dispatch: coordinate-wise box draws whenever the geometry is a
/// fixed-variance diagonal Gaussian; otherwise the closed-form proxy above
/// d = 100 and the exact root-solved sampler below it.
inline SamplerKind choose_sampler(bool fixed_variance_diag_geometry, int dim) {
  if (fixed_variance_diag_geometry) return SamplerKind::DiagBox;
  return dim > 100 ? SamplerKind::Proxy : SamplerKind::Exact;
}

}  // namespace bccem
