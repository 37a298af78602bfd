#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bccem/mpc.hpp"
#include "bccem/vecmath.hpp"

namespace bccem {

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// world -> svg: y axis flipped inside the same bounding range
struct SvgFrame {
  double ymin, ymax;
  double sx(double x) const { return x; }
  double sy(double y) const { return ymin + ymax - y; }
};

inline void append_polyline(std::string& out, const SvgFrame& f,
                            const std::vector<Vec>& pts, const std::string& style) {
  if (pts.empty()) return;
  out += "  <polyline fill=\"none\" " + style + " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ' ';
    out += fmt_num(f.sx(pts[i][0])) + "," + fmt_num(f.sy(pts[i][1]));
  }
  out += "\"/>\n";
}

inline std::vector<Vec> simulate_plan(const RolloutEnv& env, const Vec& x0, const Vec& plan) {
  std::vector<Vec> states{x0};
  Vec x = x0, u(env.action_dim);
  const int steps = static_cast<int>(plan.size()) / env.action_dim;
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < env.action_dim; ++i)
      u[i] = std::fmin(std::fmax(plan[t * env.action_dim + i], env.action_lo[i]),
                       env.action_hi[i]);
    x = env.dynamics(x, u);
    if (!all_finite(x)) break;
    states.push_back(x);
  }
  return states;
}

}  // namespace detail

/// Render a 2D navigation episode: obstacles, start/goal, the workers'
/// planned trajectories and the centroid trajectory (dashed) from the first
/// control step, and the executed path. The executed polyline has exactly one
/// vertex per recorded state.
inline std::string trajectory_svg(const EpisodeRecord& rec, const RolloutEnv& env) {
  if (env.state_dim != 2)
    throw std::invalid_argument("trajectory_svg: only 2D environments are supported");

  double xmin = std::min(env.start[0], env.goal[0]), xmax = std::max(env.start[0], env.goal[0]);
  double ymin = std::min(env.start[1], env.goal[1]), ymax = std::max(env.start[1], env.goal[1]);
  for (const Circle& o : env.obstacles) {
    xmin = std::min(xmin, o.x - o.r);
    xmax = std::max(xmax, o.x + o.r);
    ymin = std::min(ymin, o.y - o.r);
    ymax = std::max(ymax, o.y + o.r);
  }
  for (const Vec& s : rec.states) {
    xmin = std::min(xmin, s[0]);
    xmax = std::max(xmax, s[0]);
    ymin = std::min(ymin, s[1]);
    ymax = std::max(ymax, s[1]);
  }
  const double margin = 0.05 * std::max(xmax - xmin, ymax - ymin) + 0.5;
  xmin -= margin;
  xmax += margin;
  ymin -= margin;
  ymax += margin;
  const detail::SvgFrame f{ymin, ymax};

  using detail::fmt_num;
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"720\" "
         "height=\"720\" viewBox=\"" +
         fmt_num(xmin) + " " + fmt_num(ymin) + " " + fmt_num(xmax - xmin) + " " +
         fmt_num(ymax - ymin) + "\">\n";
  out += "  <rect x=\"" + fmt_num(xmin) + "\" y=\"" + fmt_num(ymin) + "\" width=\"" +
         fmt_num(xmax - xmin) + "\" height=\"" + fmt_num(ymax - ymin) +
         "\" fill=\"white\"/>\n";

  for (const Circle& o : env.obstacles)
    out += "  <circle cx=\"" + fmt_num(f.sx(o.x)) + "\" cy=\"" + fmt_num(f.sy(o.y)) +
           "\" r=\"" + fmt_num(o.r) + "\" fill=\"#c9c9c9\" stroke=\"#666666\" "
           "stroke-width=\"0.03\"/>\n";

  if (!rec.first_step_worker_plans.empty() && rec.first_step_state.size() == 2) {
    for (const Vec& plan : rec.first_step_worker_plans)
      detail::append_polyline(out, f, detail::simulate_plan(env, rec.first_step_state, plan),
                              "stroke=\"#4f7fd0\" stroke-width=\"0.04\" opacity=\"0.55\"");
    if (!rec.first_step_centroid_plan.empty())
      detail::append_polyline(
          out, f, detail::simulate_plan(env, rec.first_step_state, rec.first_step_centroid_plan),
          "stroke=\"#1e8f3e\" stroke-width=\"0.06\" stroke-dasharray=\"0.25,0.15\"");
  }

  detail::append_polyline(out, f, rec.states, "stroke=\"#111111\" stroke-width=\"0.08\"");

  out += "  <circle cx=\"" + fmt_num(f.sx(env.start[0])) + "\" cy=\"" +
         fmt_num(f.sy(env.start[1])) + "\" r=\"0.18\" fill=\"#1e8f3e\"/>\n";
  out += "  <circle cx=\"" + fmt_num(f.sx(env.goal[0])) + "\" cy=\"" +
         fmt_num(f.sy(env.goal[1])) + "\" r=\"0.18\" fill=\"#d04f4f\"/>\n";
  out += "</svg>\n";
  return out;
}

inline void emit_trajectory_svg(const std::string& path, const EpisodeRecord& rec,
                                const RolloutEnv& env) {
  const std::string svg = trajectory_svg(rec, env);
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw std::runtime_error("cannot open output file: " + path);
  outf << svg;
  if (!outf) throw std::runtime_error("failed writing SVG: " + path);
}

}  // namespace bccem
