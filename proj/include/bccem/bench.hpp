#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bccem/cem.hpp"
#include "bccem/config.hpp"
#include "bccem/mpc.hpp"
#include "bccem/stats.hpp"
#include "bccem/vecmath.hpp"

namespace bccem {

// ---------------------------------------------------------------------------
// Objectives

/// Multimodal 2D benchmark cost J(x) = sin(3 x1) + cos(3 x2) + 0.5 ||x||^2.
inline double synthetic_cost(const Vec& x) {
  if (x.size() != 2) throw std::invalid_argument("synthetic_cost: dimension must be 2");
  return std::sin(3.0 * x[0]) + std::cos(3.0 * x[1]) + 0.5 * (x[0] * x[0] + x[1] * x[1]);
}

/// Convex check objective ||x - x*||^2, x* = (3, -2, 3, -2, ...).
inline double quadratic_cost(const Vec& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = (i % 2 == 0) ? 3.0 : -2.0;
    s += (x[i] - t) * (x[i] - t);
  }
  return s;
}

enum class ObjectiveId { SyntheticMultimodal, Quadratic, Navigation };

inline const char* objective_name(ObjectiveId id) {
  switch (id) {
    case ObjectiveId::SyntheticMultimodal: return "synthetic-multimodal";
    case ObjectiveId::Quadratic: return "quadratic";
    case ObjectiveId::Navigation: return "navigation";
  }
  return "?";
}

inline ObjectiveId parse_objective(const std::string& s) {
  if (s == "synthetic-multimodal" || s == "synthetic") return ObjectiveId::SyntheticMultimodal;
  if (s == "quadratic") return ObjectiveId::Quadratic;
  if (s == "navigation") return ObjectiveId::Navigation;
  throw std::invalid_argument("unknown objective id: '" + s +
                              "' (expected synthetic-multimodal | quadratic | navigation)");
}

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "vanilla") return OptimizerKind::Vanilla;
  if (s == "decent") return OptimizerKind::Decentralized;
  if (s == "bc-evocem") return OptimizerKind::BcEvoCem;
  throw std::invalid_argument("unknown optimizer id: '" + s +
                              "' (expected vanilla | decent | bc-evocem)");
}

// ---------------------------------------------------------------------------
// Spec and metrics

struct BenchmarkSpec {
  std::string name = "bench";
  ObjectiveId objective = ObjectiveId::SyntheticMultimodal;
  OptimizerKind optimizer = OptimizerKind::BcEvoCem;
  int dimension = 2;
  int n_workers = 5;
  std::vector<std::uint64_t> seeds = {1};
  CemConfig cem;
  MpcConfig mpc;                        // navigation only
  std::vector<Circle> nav_obstacles;    // empty = default layout
  double nav_dt = 0.2;
  std::string out_csv;                  // empty = do not write
  std::string out_summary;
  int ir_probe_iteration = 25;
  bool record_wall_time = true;  // wall_ms column is zeroed when false, which
                                 // makes reruns byte-identical

  void validate() const {
    if (seeds.empty()) throw std::invalid_argument("BenchmarkSpec: seeds must be non-empty");
    if (n_workers < 1) throw std::invalid_argument("BenchmarkSpec: n_workers >= 1");
    if (dimension < 1) throw std::invalid_argument("BenchmarkSpec: dimension >= 1");
    if (objective == ObjectiveId::SyntheticMultimodal && dimension != 2)
      throw std::invalid_argument("BenchmarkSpec: synthetic-multimodal requires dimension 2");
  }
};

struct MetricsRow {
  std::uint64_t seed;
  int iteration;
  double best_cost;  // best-so-far, non-increasing per seed
  double mean_cost;
  double ir;
  double wall_ms;
};

inline const char* csv_header() { return "seed,iteration,best_cost,mean_cost,ir,wall_ms"; }

inline std::string format_csv(const std::vector<MetricsRow>& rows) {
  std::string out = csv_header();
  out += '\n';
  char buf[256];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%llu,%d,%.17g,%.17g,%.17g,%.3f\n",
                  static_cast<unsigned long long>(r.seed), r.iteration, r.best_cost,
                  r.mean_cost, r.ir, r.wall_ms);
    out += buf;
  }
  return out;
}

inline void write_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << format_csv(rows);
  if (!out) throw std::runtime_error("failed writing CSV: " + path);
}

inline std::vector<MetricsRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != csv_header())
    throw std::runtime_error("unexpected CSV header in " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricsRow r;
    unsigned long long seed = 0;
    if (std::sscanf(line.c_str(), "%llu,%d,%lg,%lg,%lg,%lg", &seed, &r.iteration, &r.best_cost,
                    &r.mean_cost, &r.ir, &r.wall_ms) != 6)
      throw std::runtime_error("bad CSV row: " + line);
    r.seed = seed;
    rows.push_back(r);
  }
  return rows;
}

struct IterationAggregate {
  int iteration;
  double mean_best, std_best, mean_avg, std_avg, mean_ir;
};

struct RunSummary {
  std::vector<IterationAggregate> per_iteration;
  double ir_probe_mean = 0.0;   // mean IR at the probe iteration
  double final_best_mean = 0.0; // mean best-so-far at the last iteration
  int probe_iteration = 0;
  std::uint64_t total_evaluations = 0;
  std::uint64_t expected_evaluations = 0;  // n * N * T per seed, summed
  std::int64_t eval_time_ns = 0;
  std::int64_t overhead_time_ns = 0;
};

/// Aggregate raw rows into per-iteration mean/std curves. A pure fold over
/// the CSV contents, so summaries can be recomputed from the file.
inline RunSummary summarize(const std::vector<MetricsRow>& rows, int probe_iteration) {
  RunSummary s;
  s.probe_iteration = probe_iteration;
  std::map<int, std::vector<const MetricsRow*>> by_iter;
  for (const auto& r : rows) by_iter[r.iteration].push_back(&r);
  for (auto& [iter, group] : by_iter) {
    Vec best, avg, ir;
    for (const MetricsRow* r : group) {
      best.push_back(r->best_cost);
      avg.push_back(r->mean_cost);
      ir.push_back(r->ir);
    }
    IterationAggregate a;
    a.iteration = iter;
    a.mean_best = sample_mean(best);
    a.std_best = sample_stddev_unbiased(best);
    a.mean_avg = sample_mean(avg);
    a.std_avg = sample_stddev_unbiased(avg);
    a.mean_ir = sample_mean(ir);
    s.per_iteration.push_back(a);
  }
  if (!s.per_iteration.empty()) {
    const auto& last = s.per_iteration.back();
    s.final_best_mean = last.mean_best;
    const int probe = std::min(probe_iteration, last.iteration);
    for (const auto& a : s.per_iteration)
      if (a.iteration == probe) s.ir_probe_mean = a.mean_ir;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Runner

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<MetricsRow> rows;
  double final_best = 0.0;
  double ir_probe = 0.0;
  double episode_cost = 0.0;    // navigation only
  double avg_plan_cost = 0.0;   // navigation only: mean over steps and workers
  std::uint64_t evaluations = 0;
  std::int64_t eval_time_ns = 0;
  std::int64_t overhead_time_ns = 0;
  bool failed = false;
};

struct BenchResult {
  BenchmarkSpec spec;
  std::vector<MetricsRow> rows;
  std::vector<SeedResult> seeds;
  RunSummary summary;
};

namespace detail {

inline SeedResult run_ensemble_seed(const BenchmarkSpec& spec, std::uint64_t seed) {
  const CostFn cost = spec.objective == ObjectiveId::SyntheticMultimodal
                          ? CostFn(synthetic_cost)
                          : CostFn(quadratic_cost);

  // vanilla = one worker carrying the whole n * N evaluation budget
  CemConfig cfg = spec.cem;
  int n = spec.n_workers;
  OptimizerKind kind = spec.optimizer;
  if (kind == OptimizerKind::Vanilla) {
    cfg.population_size = spec.cem.population_size * spec.n_workers;
    n = 1;
  }

  const EnsembleState st = run_ensemble(kind, n, cost, cfg, seed);

  SeedResult out;
  out.seed = seed;
  out.evaluations = st.cost_evaluations;
  out.eval_time_ns = st.eval_time_ns;
  out.overhead_time_ns = st.overhead_time_ns;
  out.final_best = st.best_cost;
  for (int t = 0; t < static_cast<int>(st.history.size()); ++t) {
    const auto& h = st.history[t];
    MetricsRow r{seed, t + 1, h.best_cost_so_far, h.mean_cost, h.information_radius,
                 spec.record_wall_time ? h.wall_ms : 0.0};
    out.rows.push_back(r);
    if (t + 1 == std::min<int>(spec.ir_probe_iteration, cfg.max_iterations))
      out.ir_probe = h.information_radius;
  }
  return out;
}

inline SeedResult run_navigation_seed(const BenchmarkSpec& spec, std::uint64_t seed,
                                      EpisodeRecord* episode_out = nullptr) {
  const RolloutEnv env = make_point_mass_nav_env(spec.nav_obstacles, spec.nav_dt);
  MpcConfig cfg = spec.mpc;
  cfg.cem = spec.cem;
  OptimizerKind kind = spec.optimizer;
  int n = spec.n_workers;
  if (kind == OptimizerKind::Vanilla) n = 1;  // single planner, no ensemble machinery

  const EpisodeRecord rec = mpc_episode(env, n, cfg, kind, seed);

  SeedResult out;
  out.seed = seed;
  out.evaluations = rec.cost_evaluations;
  out.eval_time_ns = rec.eval_time_ns;
  out.overhead_time_ns = rec.bookkeeping_time_ns;
  out.episode_cost = rec.episode_cost;
  out.failed = rec.failed;
  if (!rec.avg_plan_cost_per_step.empty())
    out.avg_plan_cost = mean_of(rec.avg_plan_cost_per_step);

  double best_so_far = std::numeric_limits<double>::infinity();
  for (int t = 0; t < static_cast<int>(rec.best_plan_cost_per_step.size()); ++t) {
    best_so_far = std::min(best_so_far, rec.best_plan_cost_per_step[t]);
    const double wall =
        (spec.record_wall_time && t < static_cast<int>(rec.wall_ms_per_step.size()))
            ? rec.wall_ms_per_step[t]
            : 0.0;
    MetricsRow r{seed, t + 1, best_so_far, rec.avg_plan_cost_per_step[t], rec.ir_per_step[t],
                 wall};
    out.rows.push_back(r);
    if (t + 1 == spec.ir_probe_iteration) out.ir_probe = rec.ir_per_step[t];
  }
  out.final_best = best_so_far;
  if (episode_out) *episode_out = rec;
  return out;
}

}  // namespace detail

inline std::string format_summary(const BenchResult& result);

/// Run the spec'd optimizer for each seed (seeds execute concurrently, rows
/// are emitted in seed order) and optionally write the CSV and summary files.
inline BenchResult run_benchmark(const BenchmarkSpec& spec) {
  spec.validate();

  BenchResult result;
  result.spec = spec;
  result.seeds.resize(spec.seeds.size());

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_threads =
      std::min<unsigned>(hw, static_cast<unsigned>(spec.seeds.size()));

  std::vector<std::string> errors(spec.seeds.size());
  auto work = [&](unsigned tid) {
    for (std::size_t i = tid; i < spec.seeds.size(); i += n_threads) {
      try {
        result.seeds[i] = spec.objective == ObjectiveId::Navigation
                              ? detail::run_navigation_seed(spec, spec.seeds[i])
                              : detail::run_ensemble_seed(spec, spec.seeds[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (n_threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      throw std::runtime_error("seed " + std::to_string(spec.seeds[i]) + ": " + errors[i]);

  for (const SeedResult& s : result.seeds)
    result.rows.insert(result.rows.end(), s.rows.begin(), s.rows.end());
  result.summary = summarize(result.rows, spec.ir_probe_iteration);

  const std::uint64_t T = spec.objective == ObjectiveId::Navigation
                              ? static_cast<std::uint64_t>(spec.mpc.task_horizon) *
                                    spec.mpc.inner_iters
                              : static_cast<std::uint64_t>(spec.cem.max_iterations);
  result.summary.expected_evaluations = static_cast<std::uint64_t>(spec.n_workers) *
                                        spec.cem.population_size * T * spec.seeds.size();
  for (const SeedResult& s : result.seeds) {
    result.summary.total_evaluations += s.evaluations;
    result.summary.eval_time_ns += s.eval_time_ns;
    result.summary.overhead_time_ns += s.overhead_time_ns;
  }

  if (!spec.out_csv.empty()) write_csv(spec.out_csv, result.rows);
  if (!spec.out_summary.empty()) {
    std::ofstream out(spec.out_summary, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + spec.out_summary);
    out << format_summary(result);
  }
  return result;
}

inline std::string format_summary(const BenchResult& result) {
  const BenchmarkSpec& spec = result.spec;
  const RunSummary& s = result.summary;
  std::ostringstream out;
  out << "# " << spec.name << " summary\n";
  out << "objective = " << objective_name(spec.objective) << "\n";
  out << "optimizer = " << optimizer_name(spec.optimizer) << "\n";
  out << "workers = " << spec.n_workers << "\n";
  out << "seeds = " << spec.seeds.size() << "\n";
  out << "total_evaluations = " << s.total_evaluations << "\n";
  out << "expected_evaluations = " << s.expected_evaluations << "\n";
  out << "final_best_mean = " << s.final_best_mean << "\n";
  out << "ir_probe_iteration = " << s.probe_iteration << "\n";
  out << "ir_probe_mean = " << s.ir_probe_mean << "\n";
  if (s.eval_time_ns > 0)
    out << "overhead_over_eval = "
        << static_cast<double>(s.overhead_time_ns) / static_cast<double>(s.eval_time_ns)
        << "\n";
  if (spec.objective == ObjectiveId::Navigation) {
    Vec ep, plan;
    for (const SeedResult& r : result.seeds) {
      ep.push_back(r.episode_cost);
      plan.push_back(r.avg_plan_cost);
    }
    out << "episode_cost_mean = " << sample_mean(ep) << "\n";
    out << "avg_plan_cost_mean = " << sample_mean(plan) << "\n";
  }
  out << "# iteration, mean_best, std_best, mean_avg, std_avg, mean_ir\n";
  for (const IterationAggregate& a : s.per_iteration) {
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%d, %.10g, %.10g, %.10g, %.10g, %.10g\n", a.iteration,
                  a.mean_best, a.std_best, a.mean_avg, a.std_avg, a.mean_ir);
    out << buf;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Config file mapping

inline std::vector<std::uint64_t> expand_seeds(std::uint64_t base, int count) {
  if (count < 1) throw std::invalid_argument("seed count must be >= 1");
  std::vector<std::uint64_t> seeds(count);
  for (int i = 0; i < count; ++i) seeds[i] = base + static_cast<std::uint64_t>(i);
  return seeds;
}

/// Apply a parsed config file onto a spec. Unknown sections or keys are
/// collected and reported together.
inline void apply_ini(BenchmarkSpec& spec, const IniData& ini) {
  std::vector<std::string> bad;
  std::uint64_t seed_base = spec.seeds.empty() ? 1 : spec.seeds.front();
  int seed_count = static_cast<int>(std::max<std::size_t>(1, spec.seeds.size()));
  bool seeds_touched = false;

  for (const auto& [section, kv] : ini) {
    for (const auto& [key, value] : kv) {
      try {
        if (section == "run") {
          if (key == "name") spec.name = value;
          else if (key == "objective") spec.objective = parse_objective(value);
          else if (key == "optimizer") spec.optimizer = parse_optimizer(value);
          else if (key == "workers") spec.n_workers = std::stoi(value);
          else if (key == "dimension") spec.dimension = std::stoi(value);
          else if (key == "seed") { seed_base = std::stoull(value); seeds_touched = true; }
          else if (key == "seeds") { seed_count = std::stoi(value); seeds_touched = true; }
          else if (key == "out") spec.out_csv = value;
          else if (key == "summary") spec.out_summary = value;
          else if (key == "ir_probe_iteration") spec.ir_probe_iteration = std::stoi(value);
          else if (key == "record_wall_time") spec.record_wall_time = std::stoi(value) != 0;
          else bad.push_back(section + "." + key);
        } else if (section == "cem") {
          if (key == "population") spec.cem.population_size = std::stoi(value);
          else if (key == "elite_fraction") spec.cem.elite_fraction = std::stod(value);
          else if (key == "smoothing_alpha") spec.cem.smoothing_alpha = std::stod(value);
          else if (key == "init_variance") spec.cem.init_variance = std::stod(value);
          else if (key == "iterations") spec.cem.max_iterations = std::stoi(value);
          else if (key == "variance_floor") spec.cem.variance_floor = std::stod(value);
          else if (key == "trust_radius") spec.cem.trust_radius = std::stod(value);
          else if (key == "replace_per_iteration")
            spec.cem.replace_per_iteration = std::stoi(value);
          else if (key == "temperature")
            spec.cem.temperature = (value == "adaptive") ? 0.0 : std::stod(value);
          else if (key == "freeze_variance") spec.cem.freeze_variance = std::stoi(value) != 0;
          else if (key == "init_box_lo") spec.cem.init_mean_lo = parse_double_list(value);
          else if (key == "init_box_hi") spec.cem.init_mean_hi = parse_double_list(value);
          else bad.push_back(section + "." + key);
        } else if (section == "mpc") {
          if (key == "horizon") spec.mpc.horizon = std::stoi(value);
          else if (key == "inner_iters") spec.mpc.inner_iters = std::stoi(value);
          else if (key == "replace_period")
            spec.mpc.replace_period =
                (value == "inf" || value == "never") ? 0 : std::stoi(value);
          else if (key == "perturb_factor") spec.mpc.perturb_factor = std::stod(value);
          else if (key == "task_horizon") spec.mpc.task_horizon = std::stoi(value);
          else bad.push_back(section + "." + key);
        } else if (section == "nav") {
          if (key == "dt") spec.nav_dt = std::stod(value);
          else if (key == "obstacles") {
            spec.nav_obstacles.clear();
            std::stringstream ss(value);
            std::string group;
            while (std::getline(ss, group, ';')) {
              const Vec c = parse_double_list(group);
              if (c.empty()) continue;
              if (c.size() != 3)
                throw std::runtime_error("obstacle needs 'x,y,r': '" + group + "'");
              spec.nav_obstacles.push_back({c[0], c[1], c[2]});
            }
          } else bad.push_back(section + "." + key);
        } else {
          bad.push_back("[" + section + "] (unknown section)");
        }
      } catch (const std::exception&) {
        bad.push_back(section + "." + key + " (bad value '" + value + "')");
      }
    }
  }
  if (seeds_touched) spec.seeds = expand_seeds(seed_base, seed_count);
  if (!bad.empty()) {
    std::string msg = "invalid config fields:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw std::invalid_argument(msg);
  }
}

}  // namespace bccem
