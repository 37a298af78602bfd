#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bccem/cem.hpp"
#include "bccem/centroid.hpp"
#include "bccem/gaussian.hpp"
#include "bccem/trust_region.hpp"
#include "bccem/vecmath.hpp"

namespace bccem {

struct Circle {
  double x, y, r;
};

/// Deterministic discrete-time environment rolled out by the planner.
/// `dynamics` and the cost terms must be side-effect free.
struct RolloutEnv {
  int state_dim = 0;
  int action_dim = 0;
  double dt = 0.2;
  std::function<Vec(const Vec&, const Vec&)> dynamics;
  std::function<double(const Vec&, const Vec&)> step_cost;
  std::function<double(const Vec&)> terminal_cost;
  std::vector<Circle> obstacles;
  Vec goal, start;
  Vec action_lo, action_hi;
};

/// Cluttered 2D point-mass navigation: first-order dynamics x' = x + u * dt,
/// step cost  w_g * ||x - goal|| + w_o * sum_obs max(0, r + margin - ||x - c||)^2,
/// terminal cost 10 * ||x_H - goal||. The default layout places eight circular
/// obstacles between start (0,0) and goal (10,10).
inline RolloutEnv make_point_mass_nav_env(std::vector<Circle> obstacles = {}, double dt = 0.2,
                                          double w_goal = 1.0, double w_obstacle = 100.0,
                                          double margin = 0.05) {
  RolloutEnv env;
  env.state_dim = 2;
  env.action_dim = 2;
  env.dt = dt;
  env.start = {0.0, 0.0};
  env.goal = {10.0, 10.0};
  env.action_lo = {-1.0, -1.0};
  env.action_hi = {1.0, 1.0};
  env.obstacles = obstacles.empty()
                      ? std::vector<Circle>{{2.0, 2.5, 0.8}, {3.5, 1.0, 0.6}, {1.0, 4.5, 0.7},
                                            {4.5, 4.0, 0.9}, {6.5, 5.5, 0.8}, {5.0, 7.0, 0.7},
                                            {8.0, 7.5, 0.9}, {7.0, 9.0, 0.6}}
                      : std::move(obstacles);

  env.dynamics = [dt](const Vec& x, const Vec& u) {
    return Vec{x[0] + u[0] * dt, x[1] + u[1] * dt};
  };

  const Vec goal = env.goal;
  const auto obs = env.obstacles;
  env.step_cost = [goal, obs, w_goal, w_obstacle, margin](const Vec& x, const Vec&) {
    const double dx = x[0] - goal[0], dy = x[1] - goal[1];
    double c = w_goal * std::sqrt(dx * dx + dy * dy);
    for (const Circle& o : obs) {
      const double ox = x[0] - o.x, oy = x[1] - o.y;
      const double reach = o.r + margin;
      const double d2 = ox * ox + oy * oy;
      if (d2 < reach * reach) {  // inside the clearance band
        const double pen = reach - std::sqrt(d2);
        c += w_obstacle * pen * pen;
      }
    }
    return c;
  };
  env.terminal_cost = [goal](const Vec& x) {
    const double dx = x[0] - goal[0], dy = x[1] - goal[1];
    return 10.0 * std::sqrt(dx * dx + dy * dy);
  };
  return env;
}

/// Simulate a flattened action sequence from x0 and accumulate
/// sum_t step_cost(x_t, u_t) + terminal_cost(x_H). Numerical blow-up returns
/// the +infinity sentinel (and sets *blew_up when provided).
inline double rollout_cost(const RolloutEnv& env, const Vec& x0, const Vec& actions,
                           bool* blew_up = nullptr) {
  if (blew_up) *blew_up = false;
  if (actions.size() % env.action_dim != 0)
    throw std::invalid_argument("rollout_cost: action length not a multiple of action_dim");
  const int steps = static_cast<int>(actions.size()) / env.action_dim;

  Vec x = x0;
  Vec u(env.action_dim);
  double cost = 0.0;
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < env.action_dim; ++i) u[i] = actions[t * env.action_dim + i];
    cost += env.step_cost(x, u);
    x = env.dynamics(x, u);
    if (!all_finite(x) || !std::isfinite(cost)) {
      if (blew_up) *blew_up = true;
      return std::numeric_limits<double>::infinity();
    }
  }
  cost += env.terminal_cost(x);
  if (!std::isfinite(cost)) {
    if (blew_up) *blew_up = true;
    return std::numeric_limits<double>::infinity();
  }
  return cost;
}

/// Receding-horizon shift: drop the first `executed_steps` action blocks and
/// repeat the last block to keep the plan length.
inline Vec shift_plan(const Vec& plan, int horizon, int action_dim, int executed_steps = 1) {
  if (static_cast<int>(plan.size()) != horizon * action_dim)
    throw std::invalid_argument("shift_plan: plan length must be horizon * action_dim");
  if (executed_steps < 0 || executed_steps > horizon)
    throw std::invalid_argument("shift_plan: bad executed_steps");
  Vec out(plan.size());
  for (int t = 0; t < horizon; ++t) {
    const int src = std::min(t + executed_steps, horizon - 1);
    for (int i = 0; i < action_dim; ++i)
      out[t * action_dim + i] = plan[src * action_dim + i];
  }
  return out;
}

/// Centroid warm start: every worker's mean becomes the time-shifted centroid
/// mean plus an i.i.d. Gaussian perturbation of scale `perturb_scale`
/// (stddev), drawn from the worker's own stream; variances reset to
/// init_variance.
inline void warm_start(std::vector<WorkerState>& workers, const Vec& prev_centroid_eta,
                       int horizon, int action_dim, int executed_steps, double init_variance,
                       double perturb_scale, std::vector<RngStream>& streams) {
  if (workers.size() != streams.size())
    throw std::invalid_argument("warm_start: one stream per worker required");
  const Vec shifted = shift_plan(prev_centroid_eta, horizon, action_dim, executed_steps);
  for (std::size_t i = 0; i < workers.size(); ++i) {
    Vec mu = shifted;
    if (perturb_scale > 0.0)
      for (double& m : mu) m += perturb_scale * streams[i].normal();
    workers[i].dist = DiagGaussian(std::move(mu), Vec(shifted.size(), init_variance),
                                   workers[i].dist.variance_frozen);
  }
}

struct MpcConfig {
  CemConfig cem;          // population, elites, smoothing, init_variance, Delta, ...
  int horizon = 200;      // H: planned action blocks per solve
  int inner_iters = 5;    // CEM rounds per control step
  int replace_period = 1; // control steps between score-and-replace; <= 0 disables
  double perturb_factor = 1.0;  // warm-start noise stddev = init_variance * this
  int task_horizon = 60;  // executed control steps
};

struct EpisodeRecord {
  std::vector<Vec> states;   // executed states, states[0] = env.start
  std::vector<Vec> actions;  // executed first actions
  std::vector<std::vector<int>> replaced_per_step;  // worker ids respawned each step
  Vec step_costs;            // step_cost along the executed path
  double episode_cost = 0.0; // sum step_costs + terminal at the final state

  Vec ir_per_step;
  Vec avg_plan_cost_per_step;   // ensemble mean of worker expected costs
  Vec best_plan_cost_per_step;  // best worker's expected cost
  Vec wall_ms_per_step;

  bool failed = false;
  std::uint64_t cost_evaluations = 0;
  std::uint64_t sampler_invocations = 0;
  std::int64_t eval_time_ns = 0;
  std::int64_t bookkeeping_time_ns = 0;  // warm start + weights + centroid + scores + replace

  // snapshot after the first control step's solve, for trajectory plots
  Vec first_step_state;
  std::vector<Vec> first_step_worker_plans;
  Vec first_step_centroid_plan;
};

/// Receding-horizon episode (known dynamics). Per control step: warm start,
/// `inner_iters` CEM rounds per worker on rollout_cost from the current state,
/// centroid computation, periodic score-and-replace, then execution of the
/// best worker's first action.
///
/// Guided mode warm-starts every worker from the time-shifted centroid;
/// decentralized mode shifts each worker's own plan and never replaces.
/// The executed action is captured from the best worker's optimized plan
/// before any respawn touches it. A respawned worker keeps its trust-region
/// plan through the next warm start (its own plan is shifted instead of the
/// centroid's); re-seeding it from the centroid would undo the diversity the
/// replacement just injected.
inline EpisodeRecord mpc_episode(const RolloutEnv& env, int n_workers, const MpcConfig& cfg,
                                 OptimizerKind kind, std::uint64_t seed) {
  if (n_workers < 1) throw std::invalid_argument("mpc_episode: n_workers >= 1");
  const bool guided = kind == OptimizerKind::BcEvoCem;
  if (guided && n_workers < 2)
    throw std::invalid_argument("mpc_episode: guided evolution needs n_workers >= 2");
  if (cfg.inner_iters < 1) throw std::invalid_argument("mpc_episode: inner_iters >= 1");
  if (cfg.horizon < 1) throw std::invalid_argument("mpc_episode: horizon >= 1");

  const int ad = env.action_dim;
  const int plan_dim = cfg.horizon * ad;
  const double init_var = cfg.cem.init_variance;

  CemConfig cem_cfg = cfg.cem;
  cem_cfg.init_mean_lo.assign(plan_dim, 0.0);  // unused by mpc init, keeps validate() happy
  cem_cfg.init_mean_hi.assign(plan_dim, 0.0);
  cem_cfg.validate();

  Box bounds;
  bounds.lo.resize(plan_dim);
  bounds.hi.resize(plan_dim);
  for (int t = 0; t < cfg.horizon; ++t)
    for (int i = 0; i < ad; ++i) {
      bounds.lo[t * ad + i] = env.action_lo[i];
      bounds.hi[t * ad + i] = env.action_hi[i];
    }

  const DiagQuadraticPotential geometry =
      fixed_variance_gaussian(Vec(plan_dim, init_var));
  const Vec trust_sigma2(plan_dim, init_var);
  const double perturb_scale = init_var * cfg.perturb_factor;

  std::vector<RngStream> streams;
  streams.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) streams.push_back(RngStream::derive(seed, 1 + i));

  // All plans start at the neutral (zero) sequence; per-worker noise provides
  // the initial diversity for both modes.
  Vec prev_centroid_eta(plan_dim, 0.0);
  std::vector<WorkerState> workers;
  workers.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) {
    Vec mu(plan_dim, 0.0);
    for (double& m : mu) m += perturb_scale * streams[i].normal();
    workers.push_back(
        WorkerState{DiagGaussian(std::move(mu), Vec(plan_dim, init_var)), {}, {}, 0.0,
                    1.0 / n_workers, i});
  }

  EpisodeRecord rec;
  rec.states.push_back(env.start);
  Vec state = env.start;
  std::vector<bool> keep_own_plan(n_workers, false);  // respawned last step

  for (int step = 1; step <= cfg.task_horizon; ++step) {
    const auto step_start = std::chrono::steady_clock::now();
    std::int64_t book_ns = 0;

    if (step > 1) {
      const auto b0 = std::chrono::steady_clock::now();
      if (guided) {
        const Vec shifted = shift_plan(prev_centroid_eta, cfg.horizon, ad, 1);
        for (int i = 0; i < n_workers; ++i) {
          Vec mu = keep_own_plan[i] ? shift_plan(workers[i].dist.mean, cfg.horizon, ad, 1)
                                    : shifted;
          if (!keep_own_plan[i] && perturb_scale > 0.0)
            for (double& m : mu) m += perturb_scale * streams[i].normal();
          keep_own_plan[i] = false;
          workers[i].dist = DiagGaussian(std::move(mu), Vec(plan_dim, init_var),
                                         workers[i].dist.variance_frozen);
        }
      } else {
        for (auto& w : workers)
          w.dist = DiagGaussian(shift_plan(w.dist.mean, cfg.horizon, ad, 1),
                                Vec(plan_dim, init_var), w.dist.variance_frozen);
      }
      book_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(
                     std::chrono::steady_clock::now() - b0)
                     .count();
    }

    const CostFn plan_cost = [&](const Vec& plan) { return rollout_cost(env, state, plan); };
    for (int k = 0; k < cfg.inner_iters; ++k) {
      for (int i = 0; i < n_workers; ++i) {
        IterateInfo info;
        workers[i] = cem_iterate(workers[i], plan_cost, cem_cfg, streams[i], &info, &bounds);
        rec.cost_evaluations += info.evaluations;
        rec.eval_time_ns += info.eval_ns;
      }
    }

    const auto b1 = std::chrono::steady_clock::now();
    Vec mean_costs(n_workers);
    for (int i = 0; i < n_workers; ++i) mean_costs[i] = workers[i].mean_cost;
    const double temp = cem_cfg.temperature > 0.0 ? cem_cfg.temperature
                                                  : adaptive_temperature(mean_costs);
    const Vec weights = performance_weights(mean_costs, temp);
    for (int i = 0; i < n_workers; ++i) workers[i].weight = weights[i];
    const Centroid centroid = weighted_centroid(geometry, workers);

    // capture the executed action from the optimized plans before any respawn
    const int best = best_worker_index(workers);
    Vec action(ad);
    for (int i = 0; i < ad; ++i)
      action[i] = std::fmin(std::fmax(workers[best].dist.mean[i], env.action_lo[i]),
                            env.action_hi[i]);

    rec.replaced_per_step.emplace_back();
    if (guided && cfg.replace_period > 0 && step % cfg.replace_period == 0) {
      const Vec gamma = relevance_scores(geometry, workers, centroid);
      for (int idx : detail::replacement_order(gamma, cem_cfg.replace_per_iteration)) {
        Vec eta = diag_box_sample(centroid.eta_c, cem_cfg.trust_radius, trust_sigma2,
                                  streams[idx]);
        ++rec.sampler_invocations;
        // only the mean block is sampled; the variance block is reset, not drawn
        workers[idx].dist = DiagGaussian(std::move(eta), Vec(plan_dim, init_var),
                                         workers[idx].dist.variance_frozen);
        keep_own_plan[idx] = true;
        rec.replaced_per_step.back().push_back(workers[idx].id);
      }
    }
    prev_centroid_eta = centroid.eta_c;
    book_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(
                   std::chrono::steady_clock::now() - b1)
                   .count();

    rec.ir_per_step.push_back(centroid.information_radius);
    rec.avg_plan_cost_per_step.push_back(mean_of(mean_costs));
    rec.best_plan_cost_per_step.push_back(workers[best].mean_cost);

    if (step == 1) {
      rec.first_step_state = state;
      rec.first_step_centroid_plan = centroid.eta_c;
      for (const auto& w : workers) rec.first_step_worker_plans.push_back(w.dist.mean);
    }

    rec.step_costs.push_back(env.step_cost(state, action));
    Vec next = env.dynamics(state, action);
    rec.actions.push_back(action);
    if (!all_finite(next)) {
      rec.failed = true;
      rec.bookkeeping_time_ns += book_ns;
      break;
    }
    state = std::move(next);
    rec.states.push_back(state);

    rec.bookkeeping_time_ns += book_ns;
    rec.wall_ms_per_step.push_back(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                             step_start)
            .count() /
        1e6);
  }

  rec.episode_cost = 0.0;
  for (double c : rec.step_costs) rec.episode_cost += c;
  if (!rec.failed) rec.episode_cost += env.terminal_cost(state);
  return rec;
}

}  // namespace bccem
