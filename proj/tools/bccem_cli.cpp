// Command-line front end: benchmark runs, paired A/B comparisons, trajectory
// SVG export, and the trust-region sampler statistical checks.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure,
//             3 sampler-check failure.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bccem/bccem.hpp"

namespace {

using namespace bccem;

struct CommonOpts {
  std::uint64_t seed = 1;
  int seeds = 1;
  int workers = 5;
  int iters = 0;  // 0 = keep the spec default
  double delta = 0.0;
  std::string out, summary, config, optimizer = "bc-evocem";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--seeds", o.seeds, "number of consecutive seeds starting at --seed");
  cmd->add_option("--workers", o.workers, "ensemble size n");
  cmd->add_option("--iters", o.iters, "iteration budget (CEM iterations / MPC inner iterations)");
  cmd->add_option("--delta", o.delta, "trust-region radius");
  cmd->add_option("--out", o.out, "CSV output path");
  cmd->add_option("--summary", o.summary, "summary output path");
  cmd->add_option("--config", o.config, "config file (key = value sections)");
}

BenchmarkSpec synthetic_spec() {
  BenchmarkSpec spec;
  spec.name = "synthetic";
  spec.objective = ObjectiveId::SyntheticMultimodal;
  spec.dimension = 2;
  spec.cem.population_size = 100;
  spec.cem.elite_fraction = 0.1;
  spec.cem.smoothing_alpha = 0.1;
  spec.cem.init_variance = 0.25;   // sampling std 0.5 on the multimodal task
  spec.cem.freeze_variance = true; // mean-only family N(theta, 0.5^2 I)
  spec.cem.max_iterations = 25;
  // workers start away from the global basin; escaping local minima is the test
  spec.cem.init_mean_lo = {1.0, 1.0};
  spec.cem.init_mean_hi = {3.0, 3.0};
  return spec;
}

BenchmarkSpec navigation_spec() {
  BenchmarkSpec spec;
  spec.name = "navigation";
  spec.objective = ObjectiveId::Navigation;
  spec.dimension = 2;
  spec.cem.population_size = 100;
  spec.cem.elite_fraction = 0.1;
  spec.cem.smoothing_alpha = 0.1;
  spec.cem.init_variance = 0.1;
  spec.cem.init_mean_lo = {0.0, 0.0};  // unused by the MPC path
  spec.cem.init_mean_hi = {0.0, 0.0};
  spec.mpc.horizon = 200;
  spec.mpc.inner_iters = 5;
  spec.mpc.replace_period = 1;
  spec.mpc.task_horizon = 60;
  return spec;
}

void apply_common(BenchmarkSpec& spec, const CommonOpts& o, const CLI::App* cmd) {
  if (!o.config.empty()) apply_ini(spec, load_ini(o.config));
  if (cmd->count("--seed") || cmd->count("--seeds"))
    spec.seeds = expand_seeds(o.seed, o.seeds);
  if (cmd->count("--workers")) spec.n_workers = o.workers;
  if (cmd->count("--iters")) {
    if (spec.objective == ObjectiveId::Navigation)
      spec.mpc.inner_iters = o.iters;
    else
      spec.cem.max_iterations = o.iters;
  }
  if (cmd->count("--delta")) spec.cem.trust_radius = o.delta;
  if (cmd->count("--out")) spec.out_csv = o.out;
  if (cmd->count("--summary")) spec.out_summary = o.summary;
}

void print_result(const BenchResult& r) {
  const RunSummary& s = r.summary;
  std::printf("%s / %s: %zu seed(s)\n", objective_name(r.spec.objective),
              optimizer_name(r.spec.optimizer), r.spec.seeds.size());
  std::printf("  evaluations: %" PRIu64 " (budget %" PRIu64 ")\n", s.total_evaluations,
              s.expected_evaluations);
  std::printf("  final best cost (mean over seeds): %.6g\n", s.final_best_mean);
  std::printf("  IR at iteration %d (mean): %.6g\n", s.probe_iteration, s.ir_probe_mean);
  if (s.eval_time_ns > 0)
    std::printf("  add-on overhead / evaluation time: %.4f\n",
                static_cast<double>(s.overhead_time_ns) / static_cast<double>(s.eval_time_ns));
  if (r.spec.objective == ObjectiveId::Navigation) {
    Vec ep;
    for (const auto& sr : r.seeds) ep.push_back(sr.episode_cost);
    std::printf("  executed episode cost (mean): %.6g\n", sample_mean(ep));
  }
  if (!r.spec.out_csv.empty()) std::printf("  wrote %s\n", r.spec.out_csv.c_str());
  if (!r.spec.out_summary.empty()) std::printf("  wrote %s\n", r.spec.out_summary.c_str());
}

int run_compare(BenchmarkSpec base, const std::string& opt_a, const std::string& opt_b) {
  BenchmarkSpec sa = base, sb = base;
  sa.optimizer = parse_optimizer(opt_a);
  sb.optimizer = parse_optimizer(opt_b);
  sa.out_csv.clear();
  sb.out_csv.clear();
  sa.out_summary.clear();
  sb.out_summary.clear();

  const BenchResult ra = run_benchmark(sa);
  const BenchResult rb = run_benchmark(sb);

  const bool nav = base.objective == ObjectiveId::Navigation;
  int wins = 0;
  double ratio_sum = 0.0;
  int ratio_n = 0;
  for (std::size_t i = 0; i < base.seeds.size(); ++i) {
    const double a = nav ? ra.seeds[i].avg_plan_cost : ra.seeds[i].final_best;
    const double b = nav ? rb.seeds[i].avg_plan_cost : rb.seeds[i].final_best;
    if (a < b) ++wins;
    if (b != 0.0) {
      ratio_sum += a / b;
      ++ratio_n;
    }
  }
  const char* metric = nav ? "average planning cost" : "final best cost";
  std::printf("paired comparison on %s over %zu seed(s), metric: %s\n",
              objective_name(base.objective), base.seeds.size(), metric);
  std::printf("  %s wins vs %s: %d / %zu (%.1f%%)\n", opt_a.c_str(), opt_b.c_str(), wins,
              base.seeds.size(), 100.0 * wins / base.seeds.size());
  if (ratio_n > 0)
    std::printf("  mean normalized cost (%s / %s): %.4f\n", opt_a.c_str(), opt_b.c_str(),
                ratio_sum / ratio_n);
  std::printf("  mean final best: %s %.6g, %s %.6g\n", opt_a.c_str(),
              ra.summary.final_best_mean, opt_b.c_str(), rb.summary.final_best_mean);
  std::printf("  mean IR at probe: %s %.6g, %s %.6g\n", opt_a.c_str(), ra.summary.ir_probe_mean,
              opt_b.c_str(), rb.summary.ir_probe_mean);
  return 0;
}

// ---------------------------------------------------------------------------
// sampler-check: the trust-region statistical suite

bool check(bool ok, const char* label, const std::string& detail) {
  std::printf("[%s] %s (%s)\n", ok ? "PASS" : "FAIL", label, detail.c_str());
  return ok;
}

int run_sampler_checks() {
  bool all = true;
  char detail[160];

  // feasibility: quadratic geometry, 1e5 exact draws inside the ball
  {
    const DiagQuadraticPotential pot = fixed_variance_gaussian({1.0, 1.0});
    const TrustRegion tr({0.3, -0.7}, 0.5, pot);
    RngStream rng(20240811);
    int violations = 0;
    for (int i = 0; i < 100000; ++i)
      if (conjugate_bregman_divergence(pot, tr.center_eta, exact_sample(tr, rng)) > tr.radius)
        ++violations;
    std::snprintf(detail, sizeof(detail), "%d violations in 1e5 draws", violations);
    all &= check(violations == 0, "exact sampler feasibility, quadratic", detail);
  }
  {
    const ExpPotential pot(2);
    const TrustRegion tr({1.0, 2.0}, 0.3, pot);
    RngStream rng(77);
    int violations = 0;
    for (int i = 0; i < 100000; ++i)
      if (conjugate_bregman_divergence(pot, tr.center_eta, exact_sample(tr, rng)) >
          tr.radius * (1.0 + 1e-9))
        ++violations;
    std::snprintf(detail, sizeof(detail), "%d violations in 1e5 draws", violations);
    all &= check(violations == 0, "exact sampler feasibility, non-quadratic", detail);
  }

  // uniformity in the quadratic case: radial law r^d and angular octants
  {
    const DiagQuadraticPotential pot = fixed_variance_gaussian({1.0, 1.0});
    const TrustRegion tr({0.0, 0.0}, 0.5, pot);
    RngStream rng(99);
    const int n = 10000;
    const double rmax = std::sqrt(2.0 * tr.radius);
    Vec radii;
    std::vector<std::size_t> octants(8, 0);
    for (int i = 0; i < n; ++i) {
      const Vec s = exact_sample(tr, rng);
      radii.push_back(norm2(s) / rmax);
      const double ang = std::atan2(s[1], s[0]) + 3.14159265358979323846;
      octants[std::min<std::size_t>(7, static_cast<std::size_t>(ang / (0.25 * 3.14159265358979323846)))]++;
    }
    const double d = ks_statistic(radii, [](double r) { return r * r; });
    const double p = ks_pvalue(radii.size(), d);
    std::snprintf(detail, sizeof(detail), "KS D=%.4f p=%.4f", d, p);
    all &= check(p >= 0.01, "radial CDF matches r^d (quadratic)", detail);
    const double x2 = chi2_uniform_statistic(octants);
    const double p2 = chi2_pvalue(x2, 7);
    std::snprintf(detail, sizeof(detail), "chi2=%.3f p=%.4f", x2, p2);
    all &= check(p2 >= 0.01, "angular octants uniform", detail);
  }

  // proxy vs exact
  {
    const DiagQuadraticPotential pot = fixed_variance_gaussian({0.7, 2.3, 1.1});
    const TrustRegion tr({0.1, -0.2, 0.4}, 0.8, pot);
    const Vec hess = pot.conj_hessian_diag(tr.center_eta);
    RngStream rng(5);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Vec v = uniform_sphere_direction(3, rng);
      worst = std::max(worst,
                       std::fabs(proxy_rho_max(hess, v, tr.radius) - exact_rho_max(tr, v)));
    }
    std::snprintf(detail, sizeof(detail), "max |rho_hat - rho_max| = %.3g", worst);
    all &= check(worst < 1e-9, "proxy exact for quadratic potentials", detail);
  }
  {
    const ExpPotential pot(3);
    RngStream rng(6);
    double worst_ratio_dev = 0.0;
    const Vec center{1.5, 0.8, 2.0};
    const Vec hess = pot.conj_hessian_diag(center);
    for (int i = 0; i < 200; ++i) {
      const Vec v = uniform_sphere_direction(3, rng);
      const TrustRegion tr(center, 1e-4, pot);
      const double ratio = proxy_rho_max(hess, v, tr.radius) / exact_rho_max(tr, v);
      worst_ratio_dev = std::max(worst_ratio_dev, std::fabs(ratio - 1.0));
    }
    std::snprintf(detail, sizeof(detail), "max |ratio-1| = %.3g at Delta=1e-4", worst_ratio_dev);
    all &= check(worst_ratio_dev < 0.05, "proxy/exact ratio -> 1 (non-quadratic)", detail);
  }

  // diagonal box membership
  {
    RngStream rng(7);
    const Vec center{0.5, -1.0, 2.0, 0.0};
    const Vec sigma2{0.1, 1.0, 2.5, 0.01};
    const double delta = 0.5;
    int violations = 0;
    for (int i = 0; i < 100000; ++i) {
      const Vec s = diag_box_sample(center, delta, sigma2, rng);
      for (std::size_t j = 0; j < s.size(); ++j)
        if (std::fabs(s[j] - center[j]) > std::sqrt(2.0 * delta * sigma2[j]) * (1.0 + 1e-12))
          ++violations;
    }
    std::snprintf(detail, sizeof(detail), "%d violations in 1e5 draws", violations);
    all &= check(violations == 0, "diagonal box membership", detail);
  }

  // determinism
  {
    const DiagQuadraticPotential pot = fixed_variance_gaussian({1.0, 1.0, 1.0});
    const TrustRegion tr({0.0, 0.0, 0.0}, 0.4, pot);
    RngStream a(123), b(123);
    bool same = true;
    for (int i = 0; i < 1000; ++i) {
      const Vec sa = exact_sample(tr, a), sb = exact_sample(tr, b);
      for (std::size_t j = 0; j < sa.size(); ++j) same &= sa[j] == sb[j];
    }
    all &= check(same, "identical seeds give identical sequences", "1000 draws compared");
  }

  std::printf("%s\n", all ? "sampler-check: all checks passed" : "sampler-check: FAILURES");
  return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bregman-centroid guided ensemble CEM benchmarks"};
  app.require_subcommand(1);

  CommonOpts syn_opts, nav_opts, cmp_opts;
  std::string syn_optimizer = "bc-evocem", nav_optimizer = "bc-evocem";
  std::string cmp_objective = "synthetic-multimodal";
  std::string cmp_a = "bc-evocem", cmp_b = "decent";
  std::string nav_svg;
  int nav_steps = 0;

  CLI::App* syn = app.add_subcommand("synthetic", "multimodal 2D benchmark");
  add_common(syn, syn_opts);
  syn->add_option("--optimizer", syn_optimizer, "vanilla | decent | bc-evocem");

  CLI::App* nav = app.add_subcommand("navigate", "cluttered 2D point-mass MPC benchmark");
  add_common(nav, nav_opts);
  nav->add_option("--optimizer", nav_optimizer, "vanilla | decent | bc-evocem");
  nav->add_option("--svg", nav_svg, "write first seed's trajectory plot here");
  nav->add_option("--steps", nav_steps, "executed control steps (task horizon)");

  CLI::App* cmp = app.add_subcommand("compare", "paired-seed A/B of two optimizers");
  add_common(cmp, cmp_opts);
  cmp->add_option("--objective", cmp_objective, "synthetic-multimodal | quadratic | navigation");
  cmp->add_option("--a", cmp_a, "first optimizer id");
  cmp->add_option("--b", cmp_b, "second optimizer id");

  app.add_subcommand("sampler-check", "run the trust-region statistical checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (syn->parsed()) {
      BenchmarkSpec spec = synthetic_spec();
      apply_common(spec, syn_opts, syn);
      if (syn->count("--optimizer")) spec.optimizer = parse_optimizer(syn_optimizer);
      print_result(run_benchmark(spec));
      return 0;
    }
    if (nav->parsed()) {
      BenchmarkSpec spec = navigation_spec();
      apply_common(spec, nav_opts, nav);
      if (nav->count("--optimizer")) spec.optimizer = parse_optimizer(nav_optimizer);
      if (nav->count("--steps")) spec.mpc.task_horizon = nav_steps;
      const BenchResult r = run_benchmark(spec);
      print_result(r);
      if (!nav_svg.empty()) {
        // re-run the first seed to capture the episode for plotting
        spec.seeds = {spec.seeds.front()};
        EpisodeRecord episode;
        BenchmarkSpec one = spec;
        one.out_csv.clear();
        one.out_summary.clear();
        detail::run_navigation_seed(one, one.seeds.front(), &episode);
        emit_trajectory_svg(nav_svg, episode,
                            make_point_mass_nav_env(spec.nav_obstacles, spec.nav_dt));
        std::printf("  wrote %s\n", nav_svg.c_str());
      }
      return 0;
    }
    if (cmp->parsed()) {
      BenchmarkSpec spec = cmp_objective == "navigation" ? navigation_spec() : synthetic_spec();
      spec.objective = parse_objective(cmp_objective);
      if (spec.objective == ObjectiveId::Quadratic) {
        spec.name = "quadratic";
        spec.dimension = 2;
      }
      apply_common(spec, cmp_opts, cmp);
      return run_compare(spec, cmp_a, cmp_b);
    }
    return run_sampler_checks();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
