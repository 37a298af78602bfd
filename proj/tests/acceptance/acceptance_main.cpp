// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances and thresholds are pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "bccem/bccem.hpp"
#include "oracles.hpp"

using namespace bccem;

namespace {

int g_failures = 0;

void report(int index, const char* label, bool ok, const std::string& detail) {
  std::printf("[%s] %d. %s (%s)\n", ok ? "PASS" : "FAIL", index, label, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now() - t0)
             .count() /
         1e6;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_csv(const std::string& tag) {
  return (std::filesystem::temp_directory_path() / ("bccem_accept_" + tag + ".csv")).string();
}

// ---- criterion 1 -----------------------------------------------------------

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  RngStream rng(10101);
  double worst_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Vec sigma2{std::exp(rng.uniform(-1.0, 1.0)), std::exp(rng.uniform(-1.0, 1.0))};
    const DiagQuadraticPotential psi = fixed_variance_gaussian(sigma2);
    const int n = 2 + static_cast<int>(rng.uniform01() * 5);
    std::vector<Vec> etas, thetas;
    Vec w(n);
    for (int i = 0; i < n; ++i) {
      etas.push_back({rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)});
      thetas.push_back(psi.conj_grad(etas.back()));
      w[i] = rng.uniform(0.2, 1.0);
    }
    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= wsum;

    const Centroid closed = weighted_centroid(psi, etas, w);

    // brute-force minimization of the weighted-divergence objective
    const auto objective = [&](const Vec& theta) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += w[i] * bregman_divergence(psi, thetas[i], theta);
      return s;
    };
    Vec lo = thetas[0], hi = thetas[0];
    for (const Vec& t : thetas)
      for (int j = 0; j < 2; ++j) {
        lo[j] = std::min(lo[j], t[j]);
        hi[j] = std::max(hi[j], t[j]);
      }
    Vec best;
    double fbest = 1e300;
    Vec probe(2);
    for (int a = 0; a <= 50; ++a)
      for (int b = 0; b <= 50; ++b) {
        probe[0] = lo[0] + (hi[0] - lo[0]) * a / 50;
        probe[1] = lo[1] + (hi[1] - lo[1]) * b / 50;
        const double fp = objective(probe);
        if (fp < fbest) {
          fbest = fp;
          best = probe;
        }
      }
    const double span = std::max({hi[0] - lo[0], hi[1] - lo[1], 1e-2});
    const Vec theta_star = oracles::pattern_search(objective, best, span / 50.0, 1e-11);
    const Vec eta_star = psi.grad(theta_star);
    for (int j = 0; j < 2; ++j)
      worst_gap = std::max(worst_gap, std::fabs(eta_star[j] - closed.eta_c[j]));
  }
  const double dt = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max mean-coordinate gap %.3g, %.2f s", worst_gap, dt);
  report(1, "centroid matches brute-force minimizer on 20 random d=2 ensembles",
         worst_gap < 1e-4 && dt < 10.0, buf);
}

// ---- criterion 2 -----------------------------------------------------------

void criterion_2() {
  RngStream rng(2222);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform01() * 3);
    const int n = 2 + static_cast<int>(rng.uniform01() * 7);
    const DiagQuadraticPotential F = squared_norm_potential(d);
    std::vector<Vec> pts(n, Vec(d));
    for (auto& p : pts)
      for (double& x : p) x = rng.uniform(-5.0, 5.0);

    std::vector<Vec> etas;
    for (const Vec& p : pts) etas.push_back(F.grad(p));
    const Centroid c = weighted_centroid(F, etas, Vec(n, 1.0 / n));

    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      Vec coord(n);
      for (int i = 0; i < n; ++i) coord[i] = pts[i][j];
      var += sample_variance(coord);
    }
    worst = std::max(worst, std::fabs(c.information_radius - var) / std::max(1.0, var));
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "max relative gap %.3g over 1000 point sets", worst);
  report(2, "information radius equals sample variance under the quadratic potential",
         worst < 1e-9, buf);
}

// ---- criterion 3 -----------------------------------------------------------

void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();

  const DiagQuadraticPotential psi = fixed_variance_gaussian({0.8, 1.7});
  const TrustRegion tr({0.3, -0.6}, 0.5, psi);
  RngStream rng(33);
  int violations = 0;
  for (int i = 0; i < 100000; ++i)
    if (conjugate_bregman_divergence(psi, tr.center_eta, exact_sample(tr, rng)) > tr.radius)
      ++violations;

  const ExpPotential expf(2);
  const TrustRegion tre({0.9, 2.2}, 0.4, expf);
  for (int i = 0; i < 100000; ++i)
    if (conjugate_bregman_divergence(expf, tre.center_eta, exact_sample(tre, rng)) >
        tre.radius * (1.0 + 1e-12))
      ++violations;

  // radial law under a quadratic potential: CDF r^d
  const DiagQuadraticPotential unit = fixed_variance_gaussian({1.0, 1.0});
  const TrustRegion tru({0.0, 0.0}, 0.5, unit);
  Vec radii;
  for (int i = 0; i < 10000; ++i) radii.push_back(norm2(exact_sample(tru, rng)));
  const double rmax = std::sqrt(2.0 * tru.radius);
  for (double& r : radii) r /= rmax;
  const double d_stat = ks_statistic(radii, [](double r) { return r * r; });
  const double p = ks_pvalue(radii.size(), d_stat);

  const double dt = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d violations / 2e5 draws, KS p=%.4f, %.2f s", violations,
                p, dt);
  report(3, "exact-sampler feasibility (1e5+1e5 draws) and uniform radial law",
         violations == 0 && p >= 0.01 && dt < 30.0, buf);
}

// ---- criterion 4 -----------------------------------------------------------

void criterion_4() {
  RngStream rng(44);

  const DiagQuadraticPotential psi = fixed_variance_gaussian({0.7, 2.3, 1.1});
  const TrustRegion tr({0.1, -0.2, 0.4}, 0.8, psi);
  const Vec hess = psi.conj_hessian_diag(tr.center_eta);
  double worst_abs = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec v = uniform_sphere_direction(3, rng);
    worst_abs =
        std::max(worst_abs, std::fabs(proxy_rho_max(hess, v, tr.radius) - exact_rho_max(tr, v)));
  }

  const ExpPotential expf(3);
  const Vec center{1.5, 0.8, 2.0};
  const Vec hess_e = expf.conj_hessian_diag(center);
  const TrustRegion tre(center, 1e-4, expf);
  double worst_ratio = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec v = uniform_sphere_direction(3, rng);
    const double ratio = proxy_rho_max(hess_e, v, tre.radius) / exact_rho_max(tre, v);
    worst_ratio = std::max(worst_ratio, std::fabs(ratio - 1.0));
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf), "quad max |gap| %.3g, curved max |ratio-1| %.3g at Delta=1e-4",
                worst_abs, worst_ratio);
  report(4, "proxy radius: exact for quadratic, second-order for curved potentials",
         worst_abs < 1e-9 && worst_ratio < 0.05, buf);
}

// ---- criterion 5 -----------------------------------------------------------

void criterion_5() {
  RngStream rng(55);
  const DiagQuadraticPotential psi = fixed_variance_gaussian({1.0, 0.5, 2.0, 1.5});
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform01() * 5);
    std::vector<Vec> etas;
    for (int i = 0; i < n; ++i) {
      Vec e(4);
      for (double& x : e) x = rng.uniform(-2.0, 2.0);
      etas.push_back(e);
    }
    const Vec w(n, 1.0 / n);
    const Centroid c = weighted_centroid(psi, etas, w);
    const Vec gamma = relevance_scores(psi, etas, w, c);
    const Vec ll = likelihood_rank_scores(psi, etas, w, c);

    std::vector<int> a(n), b(n);
    std::iota(a.begin(), a.end(), 0);
    b = a;
    std::sort(a.begin(), a.end(), [&](int x, int y) {
      return gamma[x] != gamma[y] ? gamma[x] < gamma[y] : x < y;
    });
    std::sort(b.begin(), b.end(), [&](int x, int y) {
      return ll[x] != ll[y] ? ll[x] < ll[y] : x < y;
    });
    if (a != b) ++mismatches;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%d ordering mismatches in 100 ensembles", mismatches);
  report(5, "likelihood ranking reproduces relevance ranking under equal weights",
         mismatches == 0, buf);
}

// ---- criteria 6-9 (benchmark workloads) -------------------------------------

BenchmarkSpec synthetic_spec(OptimizerKind kind) {
  BenchmarkSpec spec;
  spec.name = "acceptance-synthetic";
  spec.objective = ObjectiveId::SyntheticMultimodal;
  spec.optimizer = kind;
  spec.dimension = 2;
  spec.n_workers = 5;
  spec.seeds = expand_seeds(1, 50);
  spec.cem.population_size = 100;
  spec.cem.elite_fraction = 0.1;
  spec.cem.smoothing_alpha = 0.1;
  spec.cem.init_variance = 0.25;   // sampling std 0.5, mean-only family
  spec.cem.freeze_variance = true;
  spec.cem.max_iterations = 25;
  spec.cem.trust_radius = 0.5;
  spec.cem.init_mean_lo = {1.0, 1.0};  // away from the global basin
  spec.cem.init_mean_hi = {3.0, 3.0};
  spec.ir_probe_iteration = 25;
  spec.record_wall_time = false;
  return spec;
}

BenchmarkSpec navigation_spec(OptimizerKind kind) {
  BenchmarkSpec spec;
  spec.name = "acceptance-navigation";
  spec.objective = ObjectiveId::Navigation;
  spec.optimizer = kind;
  spec.dimension = 2;
  spec.n_workers = 5;
  spec.seeds = expand_seeds(1, 20);
  spec.cem.population_size = 100;
  spec.cem.elite_fraction = 0.1;
  spec.cem.smoothing_alpha = 0.1;
  spec.cem.init_variance = 0.1;
  spec.cem.trust_radius = 0.5;
  spec.cem.init_mean_lo = {0.0, 0.0};
  spec.cem.init_mean_hi = {0.0, 0.0};
  spec.mpc.horizon = 200;
  spec.mpc.inner_iters = 5;
  spec.mpc.replace_period = 1;
  spec.mpc.task_horizon = 60;
  spec.nav_dt = 0.2;
  spec.ir_probe_iteration = 25;
  spec.record_wall_time = false;
  return spec;
}

void criterion_6(BenchResult* bc_keep) {
  const auto t0 = std::chrono::steady_clock::now();
  BenchmarkSpec bc_spec = synthetic_spec(OptimizerKind::BcEvoCem);
  BenchmarkSpec dec_spec = synthetic_spec(OptimizerKind::Decentralized);
  BenchmarkSpec van_spec = synthetic_spec(OptimizerKind::Vanilla);
  bc_spec.out_csv = temp_csv("syn_bc");
  dec_spec.out_csv = temp_csv("syn_dec");

  const BenchResult bc = run_benchmark(bc_spec);
  const BenchResult dec = run_benchmark(dec_spec);
  const BenchResult van = run_benchmark(van_spec);
  const double dt = seconds_since(t0);

  const double bc_best = bc.summary.final_best_mean;
  const double dec_best = dec.summary.final_best_mean;
  const double bc_ir = bc.summary.ir_probe_mean;
  const double van_ir = van.summary.ir_probe_mean;

  char buf[200];
  std::snprintf(buf, sizeof(buf), "mean best %.4f vs %.4f, IR@25 %.4g vs vanilla %.4g, %.1f s",
                bc_best, dec_best, bc_ir, van_ir, dt);
  report(6, "synthetic: guided mean best <= decentralized, IR@25 >= 10x vanilla",
         bc_best <= dec_best + 1e-12 && bc_ir > 0.0 && bc_ir >= 10.0 * van_ir && dt < 120.0,
         buf);
  *bc_keep = bc;
}

void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  BenchmarkSpec bc_spec = navigation_spec(OptimizerKind::BcEvoCem);
  BenchmarkSpec dec_spec = navigation_spec(OptimizerKind::Decentralized);
  bc_spec.out_csv = temp_csv("nav_bc");
  dec_spec.out_csv = temp_csv("nav_dec");

  const BenchResult bc = run_benchmark(bc_spec);
  const BenchResult dec = run_benchmark(dec_spec);
  const double dt = seconds_since(t0);

  int wins = 0;
  double ratio_sum = 0.0;
  const std::size_t n = bc.seeds.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = bc.seeds[i].avg_plan_cost;
    const double b = dec.seeds[i].avg_plan_cost;
    if (a < b) ++wins;
    ratio_sum += a / b;
  }
  const double win_frac = static_cast<double>(wins) / n;
  const double mean_ratio = ratio_sum / n;

  char buf[200];
  std::snprintf(buf, sizeof(buf), "wins %.0f%%, mean normalized cost %.3f, %.1f s",
                100.0 * win_frac, mean_ratio, dt);
  report(7, "navigation: guided beats decentralized on normalized average cost",
         win_frac >= 0.7 && mean_ratio <= 0.6 && dt < 600.0, buf);
}

void criterion_8() {
  // the criterion-6 workload with timing instrumentation enabled
  BenchmarkSpec spec = synthetic_spec(OptimizerKind::BcEvoCem);
  spec.record_wall_time = true;
  const BenchResult timed = run_benchmark(spec);
  const double share = static_cast<double>(timed.summary.overhead_time_ns) /
                       static_cast<double>(timed.summary.eval_time_ns);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "centroid+score+replace share %.4f of evaluation time",
                share);
  report(8, "add-on overhead below 5% of cost-evaluation time", share < 0.05, buf);
}

void criterion_9() {
  // rerun the criteria 6-7 workloads and byte-compare the CSVs
  bool identical = true;
  std::string which;
  const auto rerun_and_compare = [&](BenchmarkSpec spec, const std::string& tag) {
    const std::string first = temp_csv(tag);
    spec.out_csv = temp_csv(tag + "_rerun");
    run_benchmark(spec);
    const std::string a = read_file(first);
    const std::string b = read_file(spec.out_csv);
    if (a.empty() || a != b) {
      identical = false;
      which += " " + tag;
    }
    std::filesystem::remove(first);
    std::filesystem::remove(spec.out_csv);
  };

  rerun_and_compare(synthetic_spec(OptimizerKind::BcEvoCem), "syn_bc");
  rerun_and_compare(synthetic_spec(OptimizerKind::Decentralized), "syn_dec");
  rerun_and_compare(navigation_spec(OptimizerKind::BcEvoCem), "nav_bc");
  rerun_and_compare(navigation_spec(OptimizerKind::Decentralized), "nav_dec");

  report(9, "reruns produce byte-identical CSV outputs", identical,
         identical ? "criteria 6-7 workloads rerun and compared" : ("mismatch:" + which));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  BenchResult bc_synth;
  criterion_6(&bc_synth);
  criterion_7();
  criterion_8();
  criterion_9();

  if (g_failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
