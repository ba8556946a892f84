// dtsys: command-line front end. JSON reports go to --out (or stdout), plot
// data to --csv. Exit codes: 0 ok, 2 input error, 3 divergence, 4 iteration
// did not converge, 5 descent violated, 6 hypothesis failed, 7 inconclusive.

#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dtsys/io.hpp"

namespace {

using namespace dtsys;

enum Exit { kOk = 0, kInput = 2, kDiverged = 3, kNotConverged = 4, kDescent = 5, kHypothesis = 6,
            kInconclusive = 7 };

struct RunConfig {
  std::string file;
  std::string out;
  std::string csv;
  std::size_t grid = kDefaultCellsPerAxis;
  std::size_t steps = 10000;
  double burn_in = 0.8;
  std::size_t samples = 3;
  double tol_descent = 1e-12;
  double tol_zero = 0.0;  // 0 = derive from V
  double tol_level = 0.0;
  double tol_cluster = 1e-6;
  double tol_approach = 1e-6;
  double tol_fixed = 1e-10;
  double rmax = kDefaultRMax;
  double lipschitz = 0.0;
  std::string pad = "cell";
  std::size_t max_iters = 0;  // 0 = module default
};

std::vector<double> parse_numbers(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InputError("bad number '" + item + "'");
    }
    if (used != item.size() || !std::isfinite(v)) throw InputError("bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty number list");
  return out;
}

Point parse_point(const std::string& text, std::size_t dim) {
  const auto v = parse_numbers(text, ',');
  if (v.size() != dim) {
    throw InputError("point '" + text + "' has " + std::to_string(v.size()) +
                     " coordinates, system has dimension " + std::to_string(dim));
  }
  return Eigen::Map<const Point>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// "lo:hi,lo:hi"
Box parse_box(const std::string& text, std::size_t dim) {
  std::vector<double> lo, hi;
  std::stringstream ss(text);
  std::string axis;
  while (std::getline(ss, axis, ',')) {
    const auto v = parse_numbers(axis, ':');
    if (v.size() != 2) throw InputError("box axis '" + axis + "' must be lo:hi");
    lo.push_back(v[0]);
    hi.push_back(v[1]);
  }
  if (lo.size() != dim) {
    throw InputError("box '" + text + "' has " + std::to_string(lo.size()) +
                     " axes, system has dimension " + std::to_string(dim));
  }
  try {
    return Box(Eigen::Map<const Point>(lo.data(), static_cast<Eigen::Index>(dim)),
               Eigen::Map<const Point>(hi.data(), static_cast<Eigen::Index>(dim)));
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("box '") + text + "': " + e.what());
  }
}

void validate(const RunConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string(name) + " must be positive");
  };
  if (c.grid < 1) throw InputError("--grid must be at least 1");
  if (c.samples < 1) throw InputError("--samples must be at least 1");
  if (!(c.burn_in >= 0.0 && c.burn_in < 1.0)) throw InputError("--burn-in must be in [0, 1)");
  positive(c.tol_descent, "--tol-descent");
  positive(c.tol_cluster, "--tol-cluster");
  positive(c.tol_approach, "--tol-approach");
  positive(c.tol_fixed, "--tol-fixed");
  positive(c.rmax, "--rmax");
  if (c.tol_zero < 0.0) throw InputError("--tol-zero must be positive");
  if (c.tol_level < 0.0) throw InputError("--tol-level must be positive");
  if (c.pad != "none" && c.pad != "cell" && c.pad != "lipschitz") {
    throw InputError("--pad must be none, cell or lipschitz");
  }
  if (c.pad == "lipschitz" && !(c.lipschitz > 0.0)) throw InputError("--pad lipschitz needs --lipschitz L");
}

ImageConfig image_config(const RunConfig& c) {
  ImageConfig img;
  img.samples_per_axis = c.samples;
  if (c.lipschitz > 0.0 && c.pad != "none") {
    img.padding = Padding::lipschitz_bound(c.lipschitz);
  } else if (c.pad == "none") {
    img.padding = Padding::none();
  } else {
    img.padding = Padding::one_cell();
  }
  return img;
}

std::optional<std::size_t> max_iters(const RunConfig& c) {
  if (c.max_iters == 0) return std::nullopt;
  return c.max_iters;
}

void emit(const RunConfig& c, const std::string& content) {
  if (c.out.empty()) {
    std::cout << content;
  } else {
    write_file_atomic(c.out, content);
  }
}

void emit_json(const RunConfig& c, const Json& j) { emit(c, j.dump(2) + "\n"); }

void emit_csv(const RunConfig& c, const CellSet& s) {
  if (c.csv.empty()) return;
  std::ostringstream os;
  write_cellset_csv(os, s);
  write_file_atomic(c.csv, os.str());
}

Box grid_box(const System& sys, const std::optional<Box>& box) {
  if (sys.domain()) return *sys.domain();
  if (box) return *box;
  throw InputError("system has no domain; pass --box");
}

int cmd_simulate(const RunConfig& c, const std::string& x0_text) {
  const SystemFile file = load_system_file(c.file);
  const System sys = build_system(file);
  Point x0;
  if (!x0_text.empty()) {
    x0 = parse_point(x0_text, sys.dim());
  } else if (auto p = file_initial_point(file)) {
    x0 = *p;
  } else {
    throw InputError("no --x0 given and the file has no initial point");
  }
  const Trajectory traj = trajectory(sys, x0, c.steps, c.rmax);
  if (traj.diverged()) {
    std::cerr << "dtsys: motion diverged at step " << *traj.diverged_at << "\n";
    return kDiverged;
  }
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  emit(c, os.str());
  return kOk;
}

int cmd_lift(const RunConfig& c) {
  const SystemFile file = load_system_file(c.file);
  emit_json(c, system_file_to_json(lift_file(file)));
  return kOk;
}

int cmd_fixed_points(const RunConfig& c, const std::string& box_text) {
  const System sys = build_system(load_system_file(c.file));
  std::optional<Box> box;
  if (!box_text.empty()) box = parse_box(box_text, sys.dim());
  const Box search = box ? *box : grid_box(sys, box);
  const auto r = find_fixed_points(sys, search, c.grid, c.tol_fixed);
  emit_json(c, fixed_points_to_json(r));
  return kOk;
}

int cmd_limit_set(const RunConfig& c, const std::string& x0_text, const std::string& box_text) {
  const SystemFile file = load_system_file(c.file);
  const System sys = build_system(file);
  if (!x0_text.empty() && !box_text.empty()) throw InputError("pass either --x0 or --box, not both");
  if (!box_text.empty()) {
    const Box h = parse_box(box_text, sys.dim());
    auto grid = std::make_shared<const Grid>(grid_box(sys, h), c.grid);
    OmegaSetOptions opts;
    opts.max_iters = max_iters(c);
    const auto r = omega_of_set(sys, cells_of_box(grid, h), image_config(c), opts);
    if (r.status == IterationStatus::Unbounded) {
      std::cerr << "dtsys: set evolution left the grid\n";
      return kDiverged;
    }
    if (r.status == IterationStatus::NotConverged) {
      std::cerr << "dtsys: set iteration did not converge after " << r.iterations << " rounds\n";
      return kNotConverged;
    }
    emit_json(c, omega_set_to_json(r));
    emit_csv(c, r.cells);
    return kOk;
  }
  Point x0;
  if (!x0_text.empty()) {
    x0 = parse_point(x0_text, sys.dim());
  } else if (auto p = file_initial_point(file)) {
    x0 = *p;
  } else {
    throw InputError("pass --x0 or --box");
  }
  LimitSetOptions opts;
  opts.n_total = c.steps;
  opts.burn_in_fraction = c.burn_in;
  opts.cluster_tol = c.tol_cluster;
  opts.r_max = c.rmax;
  try {
    const auto est = omega_of_point(sys, x0, opts);
    emit_json(c, estimate_to_json(est, classify(est, sys, c.tol_cluster)));
  } catch (const UnboundedMotion& e) {
    std::cerr << "dtsys: " << e.what() << "\n";
    return kDiverged;
  }
  return kOk;
}

int cmd_invariant_part(const RunConfig& c, const std::string& box_text) {
  const System sys = build_system(load_system_file(c.file));
  std::optional<Box> box;
  if (!box_text.empty()) box = parse_box(box_text, sys.dim());
  const Box outer = grid_box(sys, box);
  auto grid = std::make_shared<const Grid>(outer, c.grid);
  const CellSet e = cells_of_box(grid, box ? *box : outer);
  const auto r = invariant_part(sys, e, image_config(c), max_iters(c));
  if (r.status != IterationStatus::Converged) {
    std::cerr << "dtsys: invariant-part iteration did not converge after " << r.iterations
              << " rounds\n";
    return kNotConverged;
  }
  emit_json(c, invariant_part_to_json(r));
  emit_csv(c, r.cells);
  return kOk;
}

int cmd_lasalle(const RunConfig& c, const std::vector<std::string>& x0_texts,
                const std::string& g_text, const std::string& gc_text, std::size_t ext_n) {
  const SystemFile file = load_system_file(c.file);
  const System sys = build_system(file);
  if (!sys.lyapunov()) throw InputError("lasalle needs a lyapunov function in the system file");
  Box g = g_text.empty() ? grid_box(sys, std::nullopt) : parse_box(g_text, sys.dim());
  PointList x0s;
  for (const auto& t : x0_texts) x0s.push_back(parse_point(t, sys.dim()));
  if (x0s.empty()) {
    if (auto p = file_initial_point(file)) {
      x0s.push_back(*p);
    } else {
      throw InputError("pass at least one --x0");
    }
  }
  LasalleOptions opts;
  opts.cells_per_axis = c.grid;
  opts.samples_per_cell = c.samples;
  opts.n_total = c.steps;
  opts.burn_in = c.burn_in;
  opts.descent_tol = c.tol_descent;
  if (c.tol_zero > 0.0) opts.zero_tol = c.tol_zero;
  if (c.tol_level > 0.0) opts.level_tol = c.tol_level;
  opts.approach_tol = c.tol_approach;
  opts.r_max = c.rmax;
  opts.image = image_config(c);
  opts.max_iters = max_iters(c);

  LasalleReport report;
  try {
    if (!gc_text.empty()) {
      report = lasalle_extension_analyze(sys, g, parse_box(gc_text, sys.dim()), ext_n, x0s, opts);
    } else {
      report = lasalle_analyze(sys, g, x0s, opts);
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  emit_json(c, report_to_json(report));
  (c.out.empty() ? std::cerr : std::cout) << report_summary(report);

  bool descent = false, hypothesis = false, inconclusive = false;
  for (const auto& v : report.verdicts) {
    switch (v.verdict) {
      case Verdict::Converged: break;
      case Verdict::ViolatedDescent: descent = true; break;
      case Verdict::LeftG:
      case Verdict::LeftGc:
      case Verdict::Diverged: hypothesis = true; break;
      case Verdict::Inconclusive: inconclusive = true; break;
    }
  }
  if (descent || report.violated_descent()) return kDescent;
  if (hypothesis) return kHypothesis;
  if (inconclusive) return kInconclusive;
  return kOk;
}

void add_common(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("file", c.file, "system definition (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output path (default stdout)");
  cmd->add_option("--rmax", c.rmax, "divergence radius")->capture_default_str();
}

void add_grid(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--grid", c.grid, "cells per axis")->capture_default_str();
  cmd->add_option("--samples", c.samples, "samples per axis in each cell")->capture_default_str();
  cmd->add_option("--pad", c.pad, "image padding: none, cell or lipschitz")->capture_default_str();
  cmd->add_option("--lipschitz", c.lipschitz, "Lipschitz bound of T (sup norm)");
  cmd->add_option("--max-iters", c.max_iters, "iteration cap (0 = default)");
  cmd->add_option("--csv", c.csv, "cell set plot data");
}

void add_motion(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--steps", c.steps, "trajectory length")->capture_default_str();
  cmd->add_option("--burn-in", c.burn_in, "fraction of the motion discarded")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-time dynamical systems: motions, limit sets, invariant sets, LaSalle checks"};
  app.set_config("--config", "", "TOML/INI file with option values");
  app.require_subcommand(1);

  RunConfig c;
  std::string x0, box, g, gc;
  std::vector<std::string> x0s;
  std::size_t ext_n = 0;

  auto* sim = app.add_subcommand("simulate", "write x(0..N) as CSV");
  add_common(sim, c);
  sim->add_option("--x0", x0, "initial point a,b,...");
  sim->add_option("--steps", c.steps, "number of steps N")->capture_default_str();

  auto* lift_cmd = app.add_subcommand("lift", "rewrite a recurrence as a first-order system");
  add_common(lift_cmd, c);

  auto* fp = app.add_subcommand("fixed-points", "fixed points of T in a box");
  add_common(fp, c);
  fp->add_option("--box", box, "search box lo:hi,... (default domain)");
  fp->add_option("--grid", c.grid, "scan cells per axis")->capture_default_str();
  fp->add_option("--tol-fixed", c.tol_fixed, "residual tolerance")->capture_default_str();

  auto* ls = app.add_subcommand("limit-set", "limit set of a point or a box");
  add_common(ls, c);
  add_grid(ls, c);
  add_motion(ls, c);
  ls->add_option("--x0", x0, "initial point (point mode)");
  ls->add_option("--box", box, "initial box lo:hi,... (set mode)");
  ls->add_option("--tol-cluster", c.tol_cluster, "tail clustering radius")->capture_default_str();

  auto* ip = app.add_subcommand("invariant-part", "largest invariant subset of a box");
  add_common(ip, c);
  add_grid(ip, c);
  ip->add_option("--box", box, "box lo:hi,... (default domain)");

  auto* las = app.add_subcommand("lasalle", "check an invariance-principle certificate");
  add_common(las, c);
  add_grid(las, c);
  add_motion(las, c);
  las->add_option("--x0", x0s, "initial point (repeatable)");
  las->add_option("--G", g, "region G lo:hi,... (default domain)");
  las->add_option("--extension-box", gc, "compact G_c inside G (extension mode)");
  las->add_option("--extension-n", ext_n, "step after which motions stay in G_c");
  las->add_option("--tol-descent", c.tol_descent, "allowed dV > 0")->capture_default_str();
  las->add_option("--tol-zero", c.tol_zero, "|dV| threshold for E (default scales with V)");
  las->add_option("--tol-level", c.tol_level, "|V - c| threshold (default scales with V)");
  las->add_option("--tol-approach", c.tol_approach, "distance to target")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    validate(c);
    if (sim->parsed()) return cmd_simulate(c, x0);
    if (lift_cmd->parsed()) return cmd_lift(c);
    if (fp->parsed()) return cmd_fixed_points(c, box);
    if (ls->parsed()) return cmd_limit_set(c, x0, box);
    if (ip->parsed()) return cmd_invariant_part(c, box);
    if (las->parsed()) return cmd_lasalle(c, x0s, g, gc, ext_n);
  } catch (const InputError& e) {
    std::cerr << "dtsys: " << e.what() << "\n";
    return kInput;
  } catch (const ParseError& e) {
    std::cerr << "dtsys: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "dtsys: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}
