#include "dtsys/lasalle.hpp"

#include <algorithm>
#include <cmath>

#include "dtsys/limitset.hpp"

namespace dtsys {

double delta_V(const System& sys, const Point& x) {
  if (!sys.lyapunov()) throw std::invalid_argument("system has no lyapunov function");
  return sys.lyapunov_value(sys.map(x)) - sys.lyapunov_value(x);
}

DescentAudit check_descent(const System& sys, const CellSet& g, std::size_t samples_per_cell,
                           double descent_tol) {
  if (!sys.lyapunov()) throw std::invalid_argument("system has no lyapunov function");
  DescentAudit audit;
  for (auto cell : g.indices()) {
    for (const Point& x : sample_lattice(g.grid().cell_box(cell), samples_per_cell)) {
      const double d = delta_V(sys, x);
      ++audit.samples;
      // NaN counts as a violation: the certificate cannot be confirmed there.
      if (!(d <= descent_tol)) audit.violations.push_back({x, d});
      const double rank = std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
      if (audit.worst.size() == 0 || rank > audit.max_delta) {
        audit.max_delta = rank;
        audit.worst = x;
      }
    }
  }
  return audit;
}

CellSet e_set(const System& sys, const CellSet& g, double zero_tol, std::size_t samples_per_cell) {
  std::vector<std::size_t> out;
  for (auto cell : g.indices()) {
    for (const Point& x : sample_lattice(g.grid().cell_box(cell), samples_per_cell)) {
      if (std::abs(delta_V(sys, x)) <= zero_tol) {
        out.push_back(cell);
        break;
      }
    }
  }
  return CellSet(g.grid_ptr(), std::move(out));
}

CellSet level_set_cells(const System& sys, double c, double level_tol, const CellSet& g,
                        std::size_t samples_per_cell) {
  if (!sys.lyapunov()) throw std::invalid_argument("system has no lyapunov function");
  std::vector<std::size_t> out;
  for (auto cell : g.indices()) {
    bool below = false, above = false, near = false;
    for (const Point& x : sample_lattice(g.grid().cell_box(cell), samples_per_cell)) {
      const double v = sys.lyapunov_value(x) - c;
      if (std::abs(v) <= level_tol) {
        near = true;
        break;
      }
      below = below || v < 0;
      above = above || v > 0;
    }
    if (near || (below && above)) out.push_back(cell);
  }
  return CellSet(g.grid_ptr(), std::move(out));
}

namespace {

double lyapunov_scale(const System& sys, const CellSet& g, std::size_t samples_per_cell) {
  double scale = 0.0;
  for (auto cell : g.indices()) {
    for (const Point& x : sample_lattice(g.grid().cell_box(cell), samples_per_cell)) {
      const double v = std::abs(sys.lyapunov_value(x));
      if (std::isfinite(v)) scale = std::max(scale, v);
    }
  }
  return scale;
}

struct SharedSets {
  std::shared_ptr<const Grid> grid;
  CellSet e;
  CellSet m;
  IterationStatus status;
};

SharedSets build_sets(const System& sys, const Box& region, const LasalleOptions& options,
                      LasalleReport& report) {
  auto grid = std::make_shared<const Grid>(region, options.cells_per_axis);
  const CellSet all = CellSet::full(grid);
  report.zero_tol = options.zero_tol.value_or(default_zero_tol(sys, all, options.samples_per_cell));
  report.level_tol = options.level_tol.value_or(default_level_tol(sys, all, options.samples_per_cell));
  CellSet e = e_set(sys, all, report.zero_tol, options.samples_per_cell);
  CellSet m(grid);
  IterationStatus status = IterationStatus::Converged;
  if (!e.empty()) {
    auto part = invariant_part(sys, e, options.image, options.max_iters);
    m = part.cells;
    status = part.status;
  }
  return {grid, e, m, status};
}

struct TailStats {
  double mean = 0.0;
  double min = 0.0;
  double stddev = 0.0;
};

TailStats tail_stats(const std::vector<double>& v, std::size_t start) {
  TailStats s;
  const std::size_t n = v.size() - start;
  s.min = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = start; i < v.size(); ++i) {
    sum += v[i];
    s.min = std::min(s.min, v[i]);
  }
  s.mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = start; i < v.size(); ++i) var += (v[i] - s.mean) * (v[i] - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(n));
  return s;
}

// Shared verdict logic. `region` is the box the motion must stay in from
// step `from` on; `left` is the verdict used when it does not.
TrajectoryVerdict judge(const System& sys, const Point& x0, const Box& region, std::size_t from,
                        Verdict left, const CellSet& m, const LasalleOptions& options,
                        double level_tol) {
  TrajectoryVerdict v;
  v.x0 = x0;
  const Trajectory traj = trajectory(sys, x0, options.n_total, options.r_max);

  std::optional<std::size_t> first_out;
  for (std::size_t n = from; n < traj.points.size(); ++n) {
    if (!region.contains(traj.points[n])) {
      first_out = n;
      break;
    }
  }
  if (traj.diverged() && (!first_out || *traj.diverged_at <= *first_out)) {
    v.verdict = Verdict::Diverged;
    v.step = traj.diverged_at;
    v.note = "motion is unbounded";
    return v;
  }
  if (first_out) {
    v.verdict = left;
    v.step = first_out;
    v.note = left == Verdict::LeftG ? "motion leaves G" : "motion leaves G_c after step N";
    return v;
  }
  if (from >= traj.points.size()) {
    v.verdict = Verdict::Inconclusive;
    v.note = "trajectory shorter than N";
    return v;
  }

  std::vector<double> values(traj.points.size());
  for (std::size_t n = 0; n < traj.points.size(); ++n) values[n] = sys.lyapunov_value(traj.points[n]);
  for (std::size_t n = from; n + 1 < values.size(); ++n) {
    if (!(values[n + 1] <= values[n] + options.descent_tol)) {
      v.verdict = Verdict::ViolatedDescent;
      v.step = n;
      v.note = "V increases along the motion";
      return v;
    }
  }

  const std::size_t start = std::max(from, tail_start(traj.points.size(), options.burn_in));
  const TailStats stats = tail_stats(values, start);
  v.c = stats.mean;
  v.c_tail_min = stats.min;
  v.c_tail_stddev = stats.stddev;

  CellSet target = m.empty() ? m : level_set_cells(sys, stats.mean, level_tol, m, options.samples_per_cell);
  v.target = target;
  if (target.empty()) {
    v.verdict = Verdict::Inconclusive;
    v.note = "M ∩ V⁻¹(c) has no cells";
    return v;
  }
  const Convergence conv = converges_to(traj, target, options.approach_tol);
  if (conv.converged && conv.entry_index <= start) {
    v.verdict = Verdict::Converged;
    v.step = conv.entry_index;
  } else {
    v.verdict = Verdict::Inconclusive;
    v.note = conv.converged ? "entered target only after burn-in" : "motion does not reach target cells";
  }
  return v;
}

void check_inputs(const System& sys, const Box& g, const PointList& x0s) {
  if (!sys.lyapunov()) throw std::invalid_argument("system has no lyapunov function");
  if (static_cast<std::size_t>(g.dim()) != sys.dim()) {
    throw std::invalid_argument("G dimension does not match system");
  }
  for (const auto& x0 : x0s) {
    if (static_cast<std::size_t>(x0.size()) != sys.dim()) {
      throw std::invalid_argument("initial point dimension does not match system");
    }
  }
}

const char* kContinuityAssumption = "T and V are assumed continuous on G; only non-finite values are detected";

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Converged: return "converged";
    case Verdict::ViolatedDescent: return "violated_descent";
    case Verdict::LeftG: return "left_G";
    case Verdict::LeftGc: return "left_G_c";
    case Verdict::Diverged: return "diverged";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string_view to_string(LasalleMode m) { return m == LasalleMode::Classic ? "classic" : "extension"; }

double default_zero_tol(const System& sys, const CellSet& g, std::size_t samples_per_cell) {
  return 1e-9 * (1.0 + lyapunov_scale(sys, g, samples_per_cell));
}

double default_level_tol(const System& sys, const CellSet& g, std::size_t samples_per_cell) {
  return 1e-6 * (1.0 + lyapunov_scale(sys, g, samples_per_cell));
}

LasalleReport lasalle_analyze(const System& sys, const Box& g, const PointList& x0s,
                              const LasalleOptions& options) {
  check_inputs(sys, g, x0s);
  LasalleReport report;
  report.mode = LasalleMode::Classic;
  report.g_box = g;
  report.assumptions.emplace_back(kContinuityAssumption);

  auto grid = std::make_shared<const Grid>(g, options.cells_per_axis);
  report.grid = grid;
  report.audit = check_descent(sys, CellSet::full(grid), options.samples_per_cell, options.descent_tol);
  if (!report.audit.holds()) {
    for (const auto& x0 : x0s) {
      TrajectoryVerdict v;
      v.x0 = x0;
      v.verdict = Verdict::ViolatedDescent;
      v.note = "descent audit failed on G";
      report.verdicts.push_back(std::move(v));
    }
    return report;
  }

  SharedSets sets = build_sets(sys, g, options, report);
  report.grid = sets.grid;
  report.e_cells = sets.e;
  report.m_cells = sets.m;
  report.m_status = sets.status;
  for (const auto& x0 : x0s) {
    report.verdicts.push_back(judge(sys, x0, g, 0, Verdict::LeftG, sets.m, options, report.level_tol));
  }
  return report;
}

LasalleReport lasalle_extension_analyze(const System& sys, const Box& g, const Box& gc, std::size_t n,
                                        const PointList& x0s, const LasalleOptions& options) {
  check_inputs(sys, g, x0s);
  if (static_cast<std::size_t>(gc.dim()) != sys.dim()) {
    throw std::invalid_argument("G_c dimension does not match system");
  }
  if (!g.contains(gc)) throw std::invalid_argument("G_c must lie inside G");
  LasalleReport report;
  report.mode = LasalleMode::Extension;
  report.g_box = g;
  report.gc_box = gc;
  report.extension_n = n;
  report.assumptions.emplace_back(kContinuityAssumption);

  auto audit_grid = std::make_shared<const Grid>(g, options.cells_per_axis);
  report.audit = check_descent(sys, CellSet::full(audit_grid), options.samples_per_cell, options.descent_tol);
  report.grid = std::make_shared<const Grid>(gc, options.cells_per_axis);
  if (!report.audit.holds()) {
    for (const auto& x0 : x0s) {
      TrajectoryVerdict v;
      v.x0 = x0;
      v.verdict = Verdict::ViolatedDescent;
      v.note = "descent audit failed on G";
      report.verdicts.push_back(std::move(v));
    }
    return report;
  }

  SharedSets sets = build_sets(sys, gc, options, report);
  report.grid = sets.grid;
  report.e_cells = sets.e;
  report.m_cells = sets.m;
  report.m_status = sets.status;
  for (const auto& x0 : x0s) {
    report.verdicts.push_back(judge(sys, x0, gc, n, Verdict::LeftGc, sets.m, options, report.level_tol));
  }
  return report;
}

}  // namespace dtsys
