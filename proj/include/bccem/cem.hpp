#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "bccem/centroid.hpp"
#include "bccem/gaussian.hpp"
#include "bccem/potential.hpp"
#include "bccem/rng.hpp"
#include "bccem/trust_region.hpp"
#include "bccem/vecmath.hpp"

namespace bccem {

using CostFn = std::function<double(const Vec&)>;

struct Box {
  Vec lo, hi;
};

struct CemConfig {
  int population_size = 100;       // N
  double elite_fraction = 0.1;     // top fraction kept for the fit
  double smoothing_alpha = 0.1;    // param <- alpha*old + (1-alpha)*elite MLE
  double init_variance = 0.1;
  int max_iterations = 25;         // T
  double variance_floor = 1e-6;
  double trust_radius = 0.5;       // Delta
  int replace_per_iteration = 1;
  double temperature = 0.0;        // <= 0 selects the adaptive IQR temperature
  bool freeze_variance = false;
  Vec init_mean_lo, init_mean_hi;  // worker means start uniform in this box

  int elite_count() const {
    return std::max(1, static_cast<int>(std::floor(population_size * elite_fraction)));
  }

  void validate() const {
    if (population_size < 1) throw std::invalid_argument("CemConfig: population_size >= 1");
    if (!(elite_fraction > 0.0) || elite_fraction > 1.0)
      throw std::invalid_argument("CemConfig: elite_fraction in (0, 1]");
    if (smoothing_alpha < 0.0 || smoothing_alpha > 1.0)
      throw std::invalid_argument("CemConfig: smoothing_alpha in [0, 1]");
    if (!(init_variance > 0.0)) throw std::invalid_argument("CemConfig: init_variance > 0");
    if (max_iterations < 1) throw std::invalid_argument("CemConfig: max_iterations >= 1");
    if (!(variance_floor > 0.0)) throw std::invalid_argument("CemConfig: variance_floor > 0");
    if (!(trust_radius > 0.0)) throw std::invalid_argument("CemConfig: trust_radius > 0");
    if (replace_per_iteration < 1)
      throw std::invalid_argument("CemConfig: replace_per_iteration >= 1");
    if (init_mean_lo.size() != init_mean_hi.size() || init_mean_lo.empty())
      throw std::invalid_argument("CemConfig: init box must be set and consistent");
    for (std::size_t i = 0; i < init_mean_lo.size(); ++i)
      if (!(init_mean_lo[i] <= init_mean_hi[i]))
        throw std::invalid_argument("CemConfig: init box lo <= hi required");
  }
};

/// Candidate indices with finite cost, ordered ascending by (cost, index).
/// Ties broken by sample index keep the elite set deterministic.
inline std::vector<int> ranked_indices(const Vec& costs) {
  std::vector<int> idx;
  idx.reserve(costs.size());
  for (int i = 0; i < static_cast<int>(costs.size()); ++i)
    if (std::isfinite(costs[i])) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (costs[a] != costs[b]) return costs[a] < costs[b];
    return a < b;
  });
  return idx;
}

struct IterateInfo {
  int evaluations = 0;
  int discarded = 0;  // non-finite costs dropped from the fit
  double best_cost = std::numeric_limits<double>::infinity();
  Vec best_point;
  std::int64_t eval_ns = 0;
};

/// One CEM update (elite refit) of a single worker.
///
/// Samples N candidates from the worker's distribution (clamped to `bounds`
/// when given), ranks them by cost, and refits mean/variance to the elite
/// set's sample moments, exponentially smoothed and variance-floored.
/// Candidates with non-finite cost are discarded; more than half non-finite
/// aborts with a diagnostic.
inline WorkerState cem_iterate(const WorkerState& worker, const CostFn& cost,
                               const CemConfig& cfg, RngStream& rng,
                               IterateInfo* info = nullptr, const Box* bounds = nullptr) {
  const int n = cfg.population_size;
  const int d = worker.dist.dim();

  WorkerState out = worker;
  out.population.clear();
  out.population.reserve(n);
  out.population_costs.assign(n, 0.0);

  for (int j = 0; j < n; ++j) {
    Vec x = worker.dist.sample(rng);
    if (bounds) x = clamp_to(x, bounds->lo, bounds->hi);
    out.population.push_back(std::move(x));
  }

  const auto t0 = std::chrono::steady_clock::now();
  for (int j = 0; j < n; ++j) out.population_costs[j] = cost(out.population[j]);
  const auto t1 = std::chrono::steady_clock::now();

  const std::vector<int> order = ranked_indices(out.population_costs);
  const int finite = static_cast<int>(order.size());
  if (finite * 2 < n)
    throw std::runtime_error("cem_iterate: worker " + std::to_string(worker.id) + ": " +
                             std::to_string(n - finite) + " of " + std::to_string(n) +
                             " candidate costs non-finite");

  const int k = std::min(cfg.elite_count(), finite);
  Vec elite_mean(d, 0.0), elite_var(d, 0.0);
  for (int e = 0; e < k; ++e) {
    const Vec& x = out.population[order[e]];
    for (int i = 0; i < d; ++i) elite_mean[i] += x[i];
  }
  for (int i = 0; i < d; ++i) elite_mean[i] /= k;
  for (int e = 0; e < k; ++e) {
    const Vec& x = out.population[order[e]];
    for (int i = 0; i < d; ++i) {
      const double dev = x[i] - elite_mean[i];
      elite_var[i] += dev * dev;
    }
  }
  for (int i = 0; i < d; ++i) elite_var[i] /= k;  // exponential-family MLE (biased)

  const double a = cfg.smoothing_alpha;
  Vec new_mean(d), new_var(d);
  const bool adapt_var = !worker.dist.variance_frozen && !cfg.freeze_variance;
  for (int i = 0; i < d; ++i) {
    new_mean[i] = a * worker.dist.mean[i] + (1.0 - a) * elite_mean[i];
    new_var[i] = adapt_var ? a * worker.dist.variance[i] + (1.0 - a) * elite_var[i]
                           : worker.dist.variance[i];
    new_var[i] = std::max(new_var[i], std::max(cfg.variance_floor, DiagGaussian::kVarianceFloor));
  }
  out.dist = DiagGaussian(std::move(new_mean), std::move(new_var), worker.dist.variance_frozen);

  double csum = 0.0;
  for (int idx : order) csum += out.population_costs[idx];
  out.mean_cost = finite > 0 ? csum / finite : std::numeric_limits<double>::infinity();

  if (info) {
    info->evaluations = n;
    info->discarded = n - finite;
    info->eval_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
    if (!order.empty()) {
      info->best_cost = out.population_costs[order.front()];
      info->best_point = out.population[order.front()];
    }
  }
  return out;
}

enum class OptimizerKind { Vanilla, Decentralized, BcEvoCem };

inline const char* optimizer_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::Vanilla: return "vanilla";
    case OptimizerKind::Decentralized: return "decent";
    case OptimizerKind::BcEvoCem: return "bc-evocem";
  }
  return "?";
}

struct IterationRecord {
  double best_cost_so_far;
  double mean_cost;
  double information_radius;
  double wall_ms = 0.0;
};

struct EnsembleState {
  std::vector<WorkerState> workers;
  Centroid centroid;
  int iteration = 0;
  std::vector<IterationRecord> history;

  double best_cost = std::numeric_limits<double>::infinity();
  Vec best_point;

  std::uint64_t cost_evaluations = 0;
  std::int64_t eval_time_ns = 0;      // time spent inside the objective
  std::int64_t overhead_time_ns = 0;  // weights + centroid + scores + replacement
  std::uint64_t sampler_invocations = 0;
  std::vector<int> replaced_last;  // worker ids respawned in the final iteration
};

/// Index of the lowest-mean-cost worker (ties broken by id).
inline int best_worker_index(const std::vector<WorkerState>& workers) {
  if (workers.empty()) throw std::invalid_argument("best_worker_index: empty ensemble");
  int best = 0;
  for (int i = 1; i < static_cast<int>(workers.size()); ++i)
    if (workers[i].mean_cost < workers[best].mean_cost) best = i;
  return best;
}

namespace detail {

inline std::vector<WorkerState> init_workers(int n_workers, const CemConfig& cfg,
                                             std::uint64_t seed) {
  RngStream init = RngStream::derive(seed, 0);
  const int d = static_cast<int>(cfg.init_mean_lo.size());
  std::vector<WorkerState> workers;
  workers.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) {
    Vec mu(d);
    for (int j = 0; j < d; ++j) mu[j] = init.uniform(cfg.init_mean_lo[j], cfg.init_mean_hi[j]);
    WorkerState w{DiagGaussian(std::move(mu), Vec(d, cfg.init_variance), cfg.freeze_variance),
                  {}, {}, 0.0, 1.0 / n_workers, i};
    workers.push_back(std::move(w));
  }
  return workers;
}

// Worker indices to respawn: the `count` lowest relevance scores, ties by id.
inline std::vector<int> replacement_order(const Vec& gamma, int count) {
  std::vector<int> idx(gamma.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (gamma[a] != gamma[b]) return gamma[a] < gamma[b];
    return a < b;
  });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(count)));
  return idx;
}

}  // namespace detail

/// Shared engine behind decentralized_run / bc_evocem_run.
///
/// Every iteration runs an independent CEM update per worker, then a barrier
/// that assigns performance weights and computes the weighted centroid; in
/// guided mode the lowest-score workers are respawned from the trust region
/// around the centroid (mean block sampled, variance reset to init_variance).
/// Respawns consume no extra cost evaluations, so all modes use exactly
/// n * N * T evaluations.
inline EnsembleState run_ensemble(OptimizerKind kind, int n_workers, const CostFn& cost,
                                  const CemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (n_workers < 1) throw std::invalid_argument("run_ensemble: n_workers >= 1");
  const bool guided = kind == OptimizerKind::BcEvoCem;
  if (guided && n_workers < 2)
    throw std::invalid_argument("run_ensemble: guided evolution needs n_workers >= 2");

  const int d = static_cast<int>(cfg.init_mean_lo.size());
  const DiagQuadraticPotential geometry = fixed_variance_gaussian(Vec(d, cfg.init_variance));
  const Vec trust_sigma2(d, cfg.init_variance);

  EnsembleState state;
  state.workers = detail::init_workers(n_workers, cfg, seed);
  std::vector<RngStream> streams;
  streams.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) streams.push_back(RngStream::derive(seed, 1 + i));

  for (int t = 1; t <= cfg.max_iterations; ++t) {
    const auto iter_start = std::chrono::steady_clock::now();

    for (int i = 0; i < n_workers; ++i) {
      IterateInfo info;
      state.workers[i] = cem_iterate(state.workers[i], cost, cfg, streams[i], &info);
      state.cost_evaluations += info.evaluations;
      state.eval_time_ns += info.eval_ns;
      if (info.best_cost < state.best_cost) {
        state.best_cost = info.best_cost;
        state.best_point = info.best_point;
      }
    }

    const auto barrier_start = std::chrono::steady_clock::now();

    Vec mean_costs(n_workers);
    for (int i = 0; i < n_workers; ++i) mean_costs[i] = state.workers[i].mean_cost;
    const double temp =
        cfg.temperature > 0.0 ? cfg.temperature : adaptive_temperature(mean_costs);
    const Vec weights = performance_weights(mean_costs, temp);
    for (int i = 0; i < n_workers; ++i) state.workers[i].weight = weights[i];

    state.centroid = weighted_centroid(geometry, state.workers);

    state.replaced_last.clear();
    if (guided) {
      const Vec gamma = relevance_scores(geometry, state.workers, state.centroid);
      for (int idx : detail::replacement_order(gamma, cfg.replace_per_iteration)) {
        Vec eta = diag_box_sample(state.centroid.eta_c, cfg.trust_radius, trust_sigma2,
                                  streams[idx]);
        ++state.sampler_invocations;
        state.workers[idx].dist =
            DiagGaussian(std::move(eta), Vec(d, cfg.init_variance), cfg.freeze_variance);
        state.replaced_last.push_back(state.workers[idx].id);
      }
    }

    const auto iter_end = std::chrono::steady_clock::now();
    state.overhead_time_ns +=
        std::chrono::duration_cast<std::chrono::nanoseconds>(iter_end - barrier_start).count();

    IterationRecord rec;
    rec.best_cost_so_far = state.best_cost;
    rec.mean_cost = mean_of(mean_costs);
    rec.information_radius = state.centroid.information_radius;
    rec.wall_ms =
        std::chrono::duration_cast<std::chrono::nanoseconds>(iter_end - iter_start).count() /
        1e6;
    state.history.push_back(rec);
    state.iteration = t;
  }
  return state;
}

/// Independent parallel CEM workers, best solution reported at the end.
inline EnsembleState decentralized_run(int n_workers, const CostFn& cost, const CemConfig& cfg,
                                       std::uint64_t seed) {
  return run_ensemble(OptimizerKind::Decentralized, n_workers, cost, cfg, seed);
}

/// Centroid-guided evolution: decentralized updates plus per-iteration
/// score-and-respawn from the trust region.
inline EnsembleState bc_evocem_run(int n_workers, const CostFn& cost, const CemConfig& cfg,
                                   std::uint64_t seed) {
  return run_ensemble(OptimizerKind::BcEvoCem, n_workers, cost, cfg, seed);
}

}  // namespace bccem
