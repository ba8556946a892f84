#include "dtsys/fixed_points.hpp"

#include <algorithm>
#include <cmath>

namespace dtsys {

namespace {

constexpr std::size_t kMaxBoxesPerCell = 1 << 14;
constexpr int kMaxDepth = 200;

struct ResidualSummary {
  bool brackets = false;  // every component's sampled range contains zero
  double best_residual = std::numeric_limits<double>::infinity();
  Point best_point;
  double center_residual = std::numeric_limits<double>::infinity();
};

// Corners plus center of a box.
PointList corner_samples(const Box& b) {
  const auto m = b.dim();
  PointList pts;
  const std::size_t corners = std::size_t{1} << m;
  pts.reserve(corners + 1);
  for (std::size_t mask = 0; mask < corners; ++mask) {
    Point p(m);
    for (Eigen::Index i = 0; i < m; ++i) p[i] = (mask >> i) & 1 ? b.upper[i] : b.lower[i];
    pts.push_back(std::move(p));
  }
  pts.push_back(b.center());
  return pts;
}

ResidualSummary summarize(const System& sys, const Box& b) {
  const auto m = b.dim();
  ResidualSummary s;
  Point lo = Point::Constant(m, std::numeric_limits<double>::infinity());
  Point hi = Point::Constant(m, -std::numeric_limits<double>::infinity());
  bool finite = true;
  const PointList pts = corner_samples(b);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Point r = sys.map(pts[k]) - pts[k];
    if (!r.allFinite()) {
      finite = false;
      continue;
    }
    lo = lo.cwiseMin(r);
    hi = hi.cwiseMax(r);
    const double norm = linf_norm(r);
    if (norm < s.best_residual) {
      s.best_residual = norm;
      s.best_point = pts[k];
    }
    if (k + 1 == pts.size()) s.center_residual = norm;
  }
  s.brackets = finite && (lo.array() <= 0.0).all() && (hi.array() >= 0.0).all();
  return s;
}

std::pair<Box, Box> split_longest(const Box& b) {
  Eigen::Index axis = 0;
  b.widths().maxCoeff(&axis);
  const double mid = 0.5 * (b.lower[axis] + b.upper[axis]);
  Box left = b, right = b;
  left.upper[axis] = mid;
  right.lower[axis] = mid;
  return {left, right};
}

void refine(const System& sys, const Box& cell, double tol, PointList& found) {
  struct Item {
    Box box;
    int depth;
  };
  std::vector<Item> stack{{cell, 0}};
  std::size_t processed = 0;
  while (!stack.empty() && processed++ < kMaxBoxesPerCell) {
    Item item = std::move(stack.back());
    stack.pop_back();
    const ResidualSummary s = summarize(sys, item.box);
    if (s.best_residual <= 1e-3 * tol) {
      found.push_back(s.best_point);
      continue;
    }
    if (!s.brackets) continue;
    const double width = linf_norm(item.box.widths());
    const double scale = 1.0 + linf_norm(item.box.center());
    if (item.depth >= kMaxDepth || width <= 4 * std::numeric_limits<double>::epsilon() * scale) {
      if (s.best_residual <= tol) found.push_back(s.best_point);
      continue;
    }
    auto [a, b] = split_longest(item.box);
    stack.push_back({std::move(b), item.depth + 1});
    stack.push_back({std::move(a), item.depth + 1});
  }
}

bool lex_less(const Point& a, const Point& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace

FixedPointResult find_fixed_points(const System& sys, const Box& search, std::size_t grid_n,
                                   double tol) {
  if (static_cast<std::size_t>(search.dim()) != sys.dim()) {
    throw std::invalid_argument("search box dimension does not match system");
  }
  if (sys.domain() && !sys.domain()->contains(search)) {
    throw std::invalid_argument("search box must lie inside the system domain");
  }
  if (grid_n == 0 || !(tol > 0)) throw std::invalid_argument("grid_n and tol must be positive");

  const auto m = search.dim();
  const Point width = search.widths() / static_cast<double>(grid_n);
  std::size_t total = 1;
  for (Eigen::Index i = 0; i < m; ++i) total *= grid_n;

  std::vector<Box> candidates;
  std::size_t near_zero_cells = 0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (Eigen::Index i = m - 1; i >= 0; --i) {
      idx[static_cast<std::size_t>(i)] = rest % grid_n;
      rest /= grid_n;
    }
    Box cell = search;
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto k = static_cast<double>(idx[static_cast<std::size_t>(i)]);
      cell.lower[i] = search.lower[i] + k * width[i];
      cell.upper[i] = idx[static_cast<std::size_t>(i)] + 1 == grid_n ? search.upper[i]
                                                                   : search.lower[i] + (k + 1) * width[i];
    }
    const ResidualSummary s = summarize(sys, cell);
    if (s.best_residual <= tol) ++near_zero_cells;
    if (s.brackets || s.best_residual <= tol) candidates.push_back(cell);
  }

  FixedPointResult result;
  if (2 * near_zero_cells > total) {
    result.continuum = true;
    return result;
  }

  PointList raw;
  for (const auto& cell : candidates) refine(sys, cell, tol, raw);

  std::sort(raw.begin(), raw.end(), lex_less);
  for (const auto& p : raw) {
    if (linf_norm(Point(sys.map(p) - p)) > tol) continue;
    const bool duplicate = std::any_of(result.points.begin(), result.points.end(),
                                       [&](const Point& q) { return linf_distance(p, q) <= 10 * tol; });
    if (!duplicate) result.points.push_back(p);
  }
  return result;
}

std::optional<PeriodResult> detect_period(const Trajectory& traj, const PeriodOptions& options) {
  const std::size_t len = traj.points.size();
  if (len == 0 || traj.diverged()) return std::nullopt;
  const double frac = std::clamp(options.tail_fraction, 0.0, 1.0);
  const auto window = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(frac * static_cast<double>(len))));
  const std::size_t start = len - std::min(window, len);
  const std::size_t last = len - 1;

  for (std::size_t p = 1; p <= options.max_period; ++p) {
    // Need two full cycles inside the window to call it periodic.
    if (last < start + 2 * p - 1) break;
    bool ok = true;
    for (std::size_t n = start; n + p <= last && ok; ++n) {
      ok = linf_distance(traj.points[n + p], traj.points[n]) <= options.tol;
    }
    if (ok) {
      PeriodResult r;
      r.period = p;
      r.cycle.assign(traj.points.end() - static_cast<std::ptrdiff_t>(p), traj.points.end());
      return r;
    }
  }
  return std::nullopt;
}

}  // namespace dtsys
