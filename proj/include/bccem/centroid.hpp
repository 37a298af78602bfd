#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "bccem/gaussian.hpp"
#include "bccem/potential.hpp"
#include "bccem/vecmath.hpp"

namespace bccem {

/// One ensemble member: its sampling distribution, the latest population it
/// evaluated, and its current performance weight.
struct WorkerState {
  DiagGaussian dist;
  std::vector<Vec> population;  // latest sampled candidates
  Vec population_costs;         // their costs, as returned by the objective
  double mean_cost = 0.0;       // arithmetic mean of the finite entries above
  double weight = 0.0;
  int id = 0;
};

/// Performance-weighted centroid of an ensemble, in both coordinate systems,
/// plus the information radius (the minimized weighted-divergence objective).
struct Centroid {
  Vec eta_c;
  Vec theta_c;
  double information_radius = 0.0;
};

namespace detail {
inline double quantile_type7(Vec sorted, double p) {
  // callers pass already-sorted data
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}
}  // namespace detail

/// Interquartile range of the mean costs; the default softmax temperature.
/// Degenerate spreads fall back to the full range, then to 1.
inline double adaptive_temperature(const Vec& mean_costs) {
  if (mean_costs.empty()) throw std::invalid_argument("adaptive_temperature: empty input");
  Vec sorted = mean_costs;
  std::sort(sorted.begin(), sorted.end());
  const double iqr =
      detail::quantile_type7(sorted, 0.75) - detail::quantile_type7(sorted, 0.25);
  if (iqr > 0.0) return iqr;
  const double range = sorted.back() - sorted.front();
  return range > 0.0 ? range : 1.0;
}

/// w_i = exp(-c_i / temperature) / sum_j exp(-c_j / temperature), computed
/// with a max-shift. Weights below 1e-12 are clamped and the vector is
/// renormalized, so the result always sums to 1 with no exact zeros.
inline Vec performance_weights(const Vec& mean_costs, double temperature) {
  if (mean_costs.empty()) throw std::invalid_argument("performance_weights: empty input");
  if (!(temperature > 0.0))
    throw std::invalid_argument("performance_weights: temperature must be positive");
  if (!all_finite(mean_costs))
    throw std::invalid_argument("performance_weights: non-finite cost");

  const double best = *std::min_element(mean_costs.begin(), mean_costs.end());
  Vec w(mean_costs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(-(mean_costs[i] - best) / temperature);
    sum += w[i];
  }
  for (double& wi : w) wi /= sum;

  constexpr double kWeightFloor = 1e-12;
  bool floored = false;
  for (double& wi : w)
    if (wi < kWeightFloor) {
      wi = kWeightFloor;
      floored = true;
    }
  if (floored) {
    double s = 0.0;
    for (double wi : w) s += wi;
    for (double& wi : w) wi /= s;
  }
  return w;
}

namespace detail {
// Weight vectors are treated as probability vectors; inputs that do not sum
// to 1 (e.g. uniform "1 per point") are normalized once here so the centroid,
// IR, and scores stay mutually consistent.
inline Vec normalized_weights(const Vec& weights, const char* where) {
  if (weights.empty()) throw std::invalid_argument(std::string(where) + ": empty ensemble");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument(std::string(where) + ": weights must be finite and >= 0");
    wsum += w;
  }
  if (!(wsum > 0.0)) throw std::invalid_argument(std::string(where) + ": all-zero weights");
  Vec w = weights;
  for (double& wi : w) wi /= wsum;
  return w;
}
}  // namespace detail

/// Weighted Bregman centroid of mean-coordinate points: eta_c = sum_i w_i eta_i,
/// theta_c = grad Psi*(eta_c), information_radius = sum_i w_i D_Psi(theta_i || theta_c).
inline Centroid weighted_centroid(const Potential& F, const std::vector<Vec>& etas,
                                  const Vec& weights) {
  if (etas.empty()) throw std::invalid_argument("weighted_centroid: empty ensemble");
  if (etas.size() != weights.size())
    throw std::invalid_argument("weighted_centroid: one weight per point required");
  const Vec w = detail::normalized_weights(weights, "weighted_centroid");

  const std::size_t d = etas.front().size();
  Centroid c;
  c.eta_c.assign(d, 0.0);
  for (std::size_t i = 0; i < etas.size(); ++i) {
    require_same_dim(etas[i], c.eta_c, "weighted_centroid");
    for (std::size_t j = 0; j < d; ++j) c.eta_c[j] += w[i] * etas[i][j];
  }
  c.theta_c = F.conj_grad(c.eta_c);

  c.information_radius = 0.0;
  for (std::size_t i = 0; i < etas.size(); ++i)
    c.information_radius += w[i] * bregman_divergence(F, F.conj_grad(etas[i]), c.theta_c);
  return c;
}

/// IR = sum_i w_i D_Psi(theta_i || theta_c); zero iff all positively weighted
/// points coincide with the centroid.
inline double information_radius(const Potential& F, const std::vector<Vec>& etas,
                                 const Vec& weights, const Centroid& c) {
  const Vec w = detail::normalized_weights(weights, "information_radius");
  double ir = 0.0;
  for (std::size_t i = 0; i < etas.size(); ++i)
    ir += w[i] * bregman_divergence(F, F.conj_grad(etas[i]), c.theta_c);
  return ir;
}

/// Relevance scores gamma_i = w_i * D_Psi(theta_i || theta_c). They decompose
/// the information radius: sum_i gamma_i = IR.
inline Vec relevance_scores(const Potential& F, const std::vector<Vec>& etas,
                            const Vec& weights, const Centroid& c) {
  if (etas.size() != weights.size())
    throw std::invalid_argument("relevance_scores: one weight per point required");
  const Vec w = detail::normalized_weights(weights, "relevance_scores");
  Vec gamma(etas.size());
  for (std::size_t i = 0; i < etas.size(); ++i)
    gamma[i] = w[i] * bregman_divergence(F, F.conj_grad(etas[i]), c.theta_c);
  return gamma;
}

/// Likelihood-based ranking shortcut: -w_i * l(theta_i; eta_c)
/// = w_i * [Psi(theta_i) - <theta_i, eta_c>].
///
/// Differs from relevance_scores only by w_i times a term constant in i, so
/// with equal weights it induces exactly the same ordering; with unequal
/// weights the orderings can in principle differ and relevance_scores is the
/// ground truth.
inline Vec likelihood_rank_scores(const Potential& F, const std::vector<Vec>& etas,
                                  const Vec& weights, const Centroid& c) {
  if (etas.size() != weights.size())
    throw std::invalid_argument("likelihood_rank_scores: one weight per point required");
  const Vec w = detail::normalized_weights(weights, "likelihood_rank_scores");
  Vec s(etas.size());
  for (std::size_t i = 0; i < etas.size(); ++i) {
    const Vec theta_i = F.conj_grad(etas[i]);
    s[i] = -w[i] * log_likelihood(F, theta_i, c.eta_c);
  }
  return s;
}

// WorkerState conveniences: the ensemble geometry lives on the mean block.

inline std::vector<Vec> worker_mean_blocks(const std::vector<WorkerState>& workers) {
  std::vector<Vec> etas;
  etas.reserve(workers.size());
  for (const auto& w : workers) etas.push_back(w.dist.mean);
  return etas;
}

inline Vec worker_weights(const std::vector<WorkerState>& workers) {
  Vec w;
  w.reserve(workers.size());
  for (const auto& ws : workers) w.push_back(ws.weight);
  return w;
}

inline Centroid weighted_centroid(const Potential& F, const std::vector<WorkerState>& workers) {
  return weighted_centroid(F, worker_mean_blocks(workers), worker_weights(workers));
}

inline Vec relevance_scores(const Potential& F, const std::vector<WorkerState>& workers,
                            const Centroid& c) {
  return relevance_scores(F, worker_mean_blocks(workers), worker_weights(workers), c);
}

inline Vec likelihood_rank_scores(const Potential& F, const std::vector<WorkerState>& workers,
                                  const Centroid& c) {
  return likelihood_rank_scores(F, worker_mean_blocks(workers), worker_weights(workers), c);
}

inline double information_radius(const Potential& F, const std::vector<WorkerState>& workers,
                                 const Centroid& c) {
  return information_radius(F, worker_mean_blocks(workers), worker_weights(workers), c);
}

}  // namespace bccem
