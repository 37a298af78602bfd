#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <vector>

#include "bccem/bench.hpp"
#include "bccem/cem.hpp"
#include "oracles.hpp"

using namespace bccem;

namespace {

CemConfig base_config(int dim = 2, double box = 3.0) {
  CemConfig cfg;
  cfg.population_size = 100;
  cfg.elite_fraction = 0.1;
  cfg.smoothing_alpha = 0.1;
  cfg.init_variance = 0.25;
  cfg.max_iterations = 25;
  cfg.init_mean_lo.assign(dim, -box);
  cfg.init_mean_hi.assign(dim, box);
  return cfg;
}

// the multimodal benchmark samples from N(theta, 0.5^2 I) — a mean-only
// family — and initializes away from the global basin so that escaping
// local minima is actually required
CemConfig synthetic_config() {
  CemConfig cfg = base_config();
  cfg.freeze_variance = true;
  cfg.init_mean_lo = {1.0, 1.0};
  cfg.init_mean_hi = {3.0, 3.0};
  return cfg;
}

WorkerState make_worker(Vec mean, double var, int id = 0) {
  return WorkerState{DiagGaussian(std::move(mean), var), {}, {}, 0.0, 1.0, id};
}

}  // namespace

TEST_CASE("elite ranking: deterministic order, finite filtering, partition property") {
  const Vec costs{3.0, 1.0, 2.0, 1.0, std::nan(""), 0.5};
  const auto order = ranked_indices(costs);
  REQUIRE(order == std::vector<int>{5, 1, 3, 2, 0});  // NaN dropped, ties by index

  // max elite cost <= min non-elite cost for any split point
  for (std::size_t k = 1; k < order.size(); ++k) {
    double max_elite = -1e300, min_rest = 1e300;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i < k)
        max_elite = std::max(max_elite, costs[order[i]]);
      else
        min_rest = std::min(min_rest, costs[order[i]]);
    }
    REQUIRE(max_elite <= min_rest);
  }
}

TEST_CASE("cem_iterate on a constant objective keeps the search contained") {
  CemConfig cfg = base_config();
  RngStream rng(42);
  WorkerState w = make_worker({1.0, -1.0}, cfg.init_variance);
  const CostFn flat = [](const Vec&) { return 7.0; };
  for (int t = 0; t < 10; ++t) {
    w = cem_iterate(w, flat, cfg, rng);
    // elites are an arbitrary subset of the scatter; nothing should blow up
    REQUIRE(std::fabs(w.dist.mean[0] - 1.0) < 3.0 * std::sqrt(cfg.init_variance));
    REQUIRE(w.dist.variance[0] <= cfg.init_variance * 1.5);
    REQUIRE(w.mean_cost == 7.0);
  }
}

TEST_CASE("cem_iterate converges on the convex quadratic") {
  CemConfig cfg = base_config();
  cfg.init_variance = 4.0;  // wide enough to cover the optimum at (3, -2)
  RngStream rng(7);
  WorkerState w = make_worker({0.0, 0.0}, cfg.init_variance);
  for (int t = 0; t < 30; ++t) w = cem_iterate(w, quadratic_cost, cfg, rng);
  REQUIRE(std::fabs(w.dist.mean[0] - 3.0) < 0.05);
  REQUIRE(std::fabs(w.dist.mean[1] + 2.0) < 0.05);
}

TEST_CASE("alpha = 1 keeps the distribution fixed") {
  CemConfig cfg = base_config();
  cfg.smoothing_alpha = 1.0;
  RngStream rng(9);
  const WorkerState w0 = make_worker({0.4, 0.8}, 0.5);
  const WorkerState w1 = cem_iterate(w0, quadratic_cost, cfg, rng);
  REQUIRE(w1.dist.mean == w0.dist.mean);
  REQUIRE(w1.dist.variance == w0.dist.variance);
}

TEST_CASE("non-finite costs: discarded below half, abort above half") {
  CemConfig cfg = base_config();
  cfg.population_size = 50;
  RngStream rng(11);
  WorkerState w = make_worker({0.0, 0.0}, 1.0);

  int calls = 0;
  const CostFn sometimes = [&calls](const Vec& x) {
    return (++calls % 4 == 0) ? std::numeric_limits<double>::infinity() : quadratic_cost(x);
  };
  IterateInfo info;
  w = cem_iterate(w, sometimes, cfg, rng, &info);
  REQUIRE(info.discarded > 0);
  REQUIRE(info.evaluations == 50);
  REQUIRE(std::isfinite(w.mean_cost));

  const CostFn mostly_bad = [&calls](const Vec& x) {
    return (++calls % 3 != 0) ? std::nan("") : quadratic_cost(x);
  };
  REQUIRE_THROWS_WITH(cem_iterate(w, mostly_bad, cfg, rng),
                      Catch::Matchers::ContainsSubstring("non-finite"));
}

TEST_CASE("decentralized run with one worker is vanilla CEM") {
  CemConfig cfg = base_config();
  cfg.max_iterations = 10;
  const EnsembleState a = decentralized_run(1, synthetic_cost, cfg, 99);
  const EnsembleState b = run_ensemble(OptimizerKind::Vanilla, 1, synthetic_cost, cfg, 99);
  REQUIRE(a.best_cost == b.best_cost);
  REQUIRE(a.workers[0].dist.mean == b.workers[0].dist.mean);
  for (std::size_t t = 0; t < a.history.size(); ++t) {
    REQUIRE(a.history[t].best_cost_so_far == b.history[t].best_cost_so_far);
    REQUIRE(a.history[t].mean_cost == b.history[t].mean_cost);
  }
}

TEST_CASE("decentralized workers land on local minima of the multimodal objective") {
  // oracle: local minima of the separable objective, found by dense 1D scans
  const auto g1 = [](double x) { return std::sin(3.0 * x) + 0.5 * x * x; };
  const auto g2 = [](double y) { return std::cos(3.0 * y) + 0.5 * y * y; };
  const auto m1 = oracles::local_minima_1d(g1, -3.0, 3.0);
  const auto m2 = oracles::local_minima_1d(g2, -3.0, 3.0);
  REQUIRE(m1.size() >= 2);
  REQUIRE(m2.size() >= 2);

  CemConfig cfg = base_config();
  const EnsembleState st = decentralized_run(5, synthetic_cost, cfg, 31);

  bool near_some_minimum = false;
  for (const WorkerState& w : st.workers) {
    for (double a : m1)
      for (double b : m2)
        if (std::hypot(w.dist.mean[0] - a, w.dist.mean[1] - b) < 0.2) near_some_minimum = true;
  }
  REQUIRE(near_some_minimum);

  // distinct seeds produce distinct traces
  const EnsembleState st2 = decentralized_run(5, synthetic_cost, cfg, 32);
  REQUIRE(st.best_cost != st2.best_cost);
}

TEST_CASE("guided evolution: symmetric pair, replacement semantics") {
  CemConfig cfg = base_config();
  cfg.max_iterations = 1;
  cfg.smoothing_alpha = 1.0;  // freeze the CEM update; isolate the replacement
  cfg.init_mean_lo = {0.5, 0.5};
  cfg.init_mean_hi = {0.5, 0.5};  // both workers start identical

  const EnsembleState st = bc_evocem_run(2, synthetic_cost, cfg, 5);
  // centroid of two identical workers is their shared mean; IR was zero at
  // centroid time
  REQUIRE(st.history.back().information_radius == 0.0);
  // tie on gamma = 0 resolves to the lowest id
  REQUIRE(st.replaced_last == std::vector<int>{0});
  // respawned worker moved away from the centroid (a.s.), so IR is now positive
  const auto geometry = fixed_variance_gaussian(Vec(2, cfg.init_variance));
  Vec w{0.5, 0.5};
  const Centroid c_after = weighted_centroid(geometry, worker_mean_blocks(st.workers), w);
  REQUIRE(c_after.information_radius > 0.0);
  REQUIRE(st.workers[0].dist.variance[0] == Catch::Approx(cfg.init_variance));
}

TEST_CASE("delta -> 0 respawns workers at the centroid") {
  CemConfig cfg = base_config();
  cfg.max_iterations = 3;
  cfg.trust_radius = 1e-14;
  const EnsembleState st = bc_evocem_run(3, synthetic_cost, cfg, 77);
  REQUIRE(st.replaced_last.size() == 1);
  const int rid = st.replaced_last[0];
  for (int j = 0; j < 2; ++j)
    REQUIRE(std::fabs(st.workers[rid].dist.mean[j] - st.centroid.eta_c[j]) < 1e-6);
}

TEST_CASE("guided evolution needs at least two workers") {
  CemConfig cfg = base_config();
  REQUIRE_THROWS_AS(bc_evocem_run(1, synthetic_cost, cfg, 1), std::invalid_argument);
}

TEST_CASE("budget parity: both strategies consume exactly n*N*T evaluations") {
  CemConfig cfg = base_config();
  cfg.max_iterations = 7;
  std::uint64_t calls = 0;
  const CostFn counted = [&calls](const Vec& x) {
    ++calls;
    return synthetic_cost(x);
  };

  calls = 0;
  const EnsembleState a = decentralized_run(4, counted, cfg, 3);
  REQUIRE(calls == 4ull * cfg.population_size * cfg.max_iterations);
  REQUIRE(a.cost_evaluations == calls);

  calls = 0;
  const EnsembleState b = bc_evocem_run(4, counted, cfg, 3);
  REQUIRE(calls == 4ull * cfg.population_size * cfg.max_iterations);
  REQUIRE(b.cost_evaluations == calls);
  REQUIRE(b.sampler_invocations == static_cast<std::uint64_t>(cfg.max_iterations));
}

TEST_CASE("guided runs keep the ensemble spread out while matching the baseline") {
  CemConfig cfg = synthetic_config();
  int bc_wins = 0;
  int ir_positive = 0;
  const int trials = 50;
  for (int s = 0; s < trials; ++s) {
    const std::uint64_t seed = 1000 + s;
    const EnsembleState dec = decentralized_run(5, synthetic_cost, cfg, seed);
    const EnsembleState evo = bc_evocem_run(5, synthetic_cost, cfg, seed);
    if (evo.best_cost <= dec.best_cost + 1e-12) ++bc_wins;
    if (evo.history.back().information_radius > 0.0) ++ir_positive;
  }
  REQUIRE(ir_positive == trials);
  REQUIRE(bc_wins >= static_cast<int>(0.7 * trials));
}

TEST_CASE("IR never collapses to zero after replacement (fuzz)") {
  RngStream seeder(404);
  int iterations_checked = 0;
  while (iterations_checked < 1000) {
    CemConfig cfg = base_config();
    cfg.max_iterations = 10;
    cfg.population_size = 30;
    const int n = 2 + static_cast<int>(seeder.uniform01() * 4);
    const EnsembleState st =
        bc_evocem_run(n, synthetic_cost, cfg, seeder.next_u64());
    const auto geometry = fixed_variance_gaussian(Vec(2, cfg.init_variance));
    const Centroid post = weighted_centroid(geometry, st.workers);
    bool respawn_off_centroid = false;
    for (int rid : st.replaced_last)
      if (sq_dist(st.workers[rid].dist.mean, post.eta_c) > 0.0) respawn_off_centroid = true;
    if (respawn_off_centroid) REQUIRE(post.information_radius > 0.0);
    iterations_checked += cfg.max_iterations;
  }
}

TEST_CASE("runs are bit-reproducible for a fixed seed and config") {
  CemConfig cfg = base_config();
  cfg.max_iterations = 12;
  for (OptimizerKind kind : {OptimizerKind::Decentralized, OptimizerKind::BcEvoCem}) {
    const EnsembleState a = run_ensemble(kind, 5, synthetic_cost, cfg, 2024);
    const EnsembleState b = run_ensemble(kind, 5, synthetic_cost, cfg, 2024);
    REQUIRE(a.best_cost == b.best_cost);
    REQUIRE(a.best_point == b.best_point);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t t = 0; t < a.history.size(); ++t) {
      REQUIRE(std::memcmp(&a.history[t].best_cost_so_far, &b.history[t].best_cost_so_far,
                          sizeof(double)) == 0);
      REQUIRE(std::memcmp(&a.history[t].mean_cost, &b.history[t].mean_cost, sizeof(double)) ==
              0);
      REQUIRE(std::memcmp(&a.history[t].information_radius, &b.history[t].information_radius,
                          sizeof(double)) == 0);
    }
    for (int i = 0; i < 5; ++i) {
      REQUIRE(a.workers[i].dist.mean == b.workers[i].dist.mean);
      REQUIRE(a.workers[i].dist.variance == b.workers[i].dist.variance);
      REQUIRE(a.workers[i].population_costs == b.workers[i].population_costs);
    }
  }
}

TEST_CASE("config validation catches bad fields") {
  CemConfig cfg = base_config();
  cfg.elite_fraction = 0.0;
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config();
  cfg.init_mean_lo = {1.0, 1.0};
  cfg.init_mean_hi = {0.0, 0.0};
  REQUIRE_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config();
  cfg.population_size = 5;
  cfg.elite_fraction = 0.1;  // floor(0.5) = 0 -> clamped to 1
  REQUIRE(cfg.elite_count() == 1);
}
