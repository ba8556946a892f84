#include "dtsys/cellset.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace dtsys {

Grid::Grid(Box box, std::vector<std::size_t> counts) : box_(std::move(box)), counts_(std::move(counts)) {
  if (static_cast<std::size_t>(box_.dim()) != counts_.size()) {
    throw std::invalid_argument("grid counts do not match box dimension");
  }
  if (counts_.empty()) throw std::invalid_argument("grid needs at least one axis");
  width_.resize(box_.dim());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    if (counts_[i] == 0) throw std::invalid_argument("grid counts must be positive");
    width_[a] = (box_.upper[a] - box_.lower[a]) / static_cast<double>(counts_[i]);
    if (!(width_[a] > 0)) throw std::invalid_argument("grid cell widths must be positive");
    size_ *= counts_[i];
  }
}

Grid::Grid(Box box, std::size_t per_axis)
    : Grid(box, std::vector<std::size_t>(static_cast<std::size_t>(box.dim()), per_axis)) {}

std::size_t Grid::flatten(const MultiIndex& idx) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) flat = flat * counts_[i] + idx[i];
  return flat;
}

MultiIndex Grid::unflatten(std::size_t flat) const {
  MultiIndex idx(counts_.size());
  for (std::size_t i = counts_.size(); i-- > 0;) {
    idx[i] = flat % counts_[i];
    flat /= counts_[i];
  }
  return idx;
}

double Grid::cell_lower(std::size_t axis, std::size_t k) const {
  const auto a = static_cast<Eigen::Index>(axis);
  return box_.lower[a] + static_cast<double>(k) * width_[a];
}

double Grid::cell_upper(std::size_t axis, std::size_t k) const {
  const auto a = static_cast<Eigen::Index>(axis);
  return k + 1 == counts_[axis] ? box_.upper[a] : cell_lower(axis, k + 1);
}

Box Grid::cell_box(std::size_t flat) const {
  const MultiIndex idx = unflatten(flat);
  Point lo(box_.dim()), hi(box_.dim());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    lo[static_cast<Eigen::Index>(i)] = cell_lower(i, idx[i]);
    hi[static_cast<Eigen::Index>(i)] = cell_upper(i, idx[i]);
  }
  return Box(lo, hi);
}

std::optional<std::pair<std::size_t, std::size_t>> Grid::axis_range(std::size_t axis, double a,
                                                                     double b) const {
  const auto ax = static_cast<Eigen::Index>(axis);
  const double lo = box_.lower[ax];
  const double hi = box_.upper[ax];
  const std::size_t n = counts_[axis];
  if (!(a <= b) || b < lo || a > hi) return std::nullopt;

  auto guess = [&](double v) {
    const double k = std::floor((v - lo) / width_[ax]);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n - 1)));
  };

  std::size_t first = guess(std::max(a, lo));
  std::size_t last = guess(std::min(b, hi));
  if (a < b) {
    // first: smallest k with upper(k) > a; last: largest k with lower(k) < b.
    while (first + 1 < n && cell_upper(axis, first) <= a) ++first;
    while (first > 0 && cell_upper(axis, first - 1) > a) --first;
    while (last + 1 < n && cell_lower(axis, last + 1) < b) ++last;
    while (last > 0 && cell_lower(axis, last) >= b) --last;
    if (cell_upper(axis, first) <= a || cell_lower(axis, last) >= b) return std::nullopt;
  } else {
    // Degenerate: smallest k with upper(k) >= a, largest k with lower(k) <= a.
    while (first + 1 < n && cell_upper(axis, first) < a) ++first;
    while (first > 0 && cell_upper(axis, first - 1) >= a) --first;
    while (last + 1 < n && cell_lower(axis, last + 1) <= a) ++last;
    while (last > 0 && cell_lower(axis, last) > a) --last;
  }
  if (first > last) return std::nullopt;
  return std::make_pair(first, last);
}

bool Grid::operator==(const Grid& other) const {
  return counts_ == other.counts_ && box_.lower == other.box_.lower && box_.upper == other.box_.upper;
}

CellSet::CellSet(std::shared_ptr<const Grid> grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("cell set needs a grid");
}

CellSet::CellSet(std::shared_ptr<const Grid> grid, std::vector<std::size_t> indices)
    : grid_(std::move(grid)), indices_(std::move(indices)) {
  if (!grid_) throw std::invalid_argument("cell set needs a grid");
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  if (!indices_.empty() && indices_.back() >= grid_->size()) {
    throw std::out_of_range("cell index outside grid");
  }
}

CellSet CellSet::full(std::shared_ptr<const Grid> grid) {
  std::vector<std::size_t> all(grid->size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return CellSet(std::move(grid), std::move(all));
}

bool CellSet::contains(std::size_t flat) const {
  return std::binary_search(indices_.begin(), indices_.end(), flat);
}

std::vector<char> CellSet::mask() const {
  std::vector<char> m(grid_->size(), 0);
  for (auto i : indices_) m[i] = 1;
  return m;
}

CellSet CellSet::from_mask(std::shared_ptr<const Grid> grid, const std::vector<char>& mask) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) idx.push_back(i);
  }
  return CellSet(std::move(grid), std::move(idx));
}

void CellSet::check_same_grid(const CellSet& other) const {
  if (grid_ != other.grid_ && !(*grid_ == *other.grid_)) {
    throw std::invalid_argument("cell sets live on different grids");
  }
}

CellSet CellSet::unite(const CellSet& other) const {
  check_same_grid(other);
  std::vector<std::size_t> out;
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end(),
                 std::back_inserter(out));
  return CellSet(grid_, std::move(out));
}

CellSet CellSet::intersect(const CellSet& other) const {
  check_same_grid(other);
  std::vector<std::size_t> out;
  std::set_intersection(indices_.begin(), indices_.end(), other.indices_.begin(),
                        other.indices_.end(), std::back_inserter(out));
  return CellSet(grid_, std::move(out));
}

CellSet CellSet::difference(const CellSet& other) const {
  check_same_grid(other);
  std::vector<std::size_t> out;
  std::set_difference(indices_.begin(), indices_.end(), other.indices_.begin(),
                      other.indices_.end(), std::back_inserter(out));
  return CellSet(grid_, std::move(out));
}

bool CellSet::subset_of(const CellSet& other) const {
  check_same_grid(other);
  return std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(),
                       indices_.end());
}

bool CellSet::operator==(const CellSet& other) const {
  return (grid_ == other.grid_ || *grid_ == *other.grid_) && indices_ == other.indices_;
}

namespace {

// Cartesian product of per-axis inclusive ranges.
template <typename Fn>
void for_each_in_ranges(const Grid& grid,
                        const std::vector<std::pair<std::size_t, std::size_t>>& ranges, Fn&& fn) {
  MultiIndex idx(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i) idx[i] = ranges[i].first;
  for (;;) {
    fn(grid.flatten(idx));
    std::size_t axis = ranges.size();
    while (axis-- > 0) {
      if (idx[axis] < ranges[axis].second) {
        ++idx[axis];
        break;
      }
      idx[axis] = ranges[axis].first;
    }
    if (axis == static_cast<std::size_t>(-1)) return;
  }
}

std::optional<std::vector<std::pair<std::size_t, std::size_t>>> box_ranges(const Grid& grid,
                                                                           const Box& b) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t i = 0; i < grid.dim(); ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    auto r = grid.axis_range(i, b.lower[a], b.upper[a]);
    if (!r) return std::nullopt;
    ranges.push_back(*r);
  }
  return ranges;
}

}  // namespace

CellSet cells_of_box(const std::shared_ptr<const Grid>& grid, const Box& b) {
  if (static_cast<std::size_t>(b.dim()) != grid->dim()) {
    throw std::invalid_argument("box dimension does not match grid");
  }
  auto ranges = box_ranges(*grid, b);
  if (!ranges) throw std::invalid_argument("box does not intersect the grid");
  std::vector<std::size_t> idx;
  for_each_in_ranges(*grid, *ranges, [&](std::size_t f) { idx.push_back(f); });
  return CellSet(grid, std::move(idx));
}

CellSet cells_containing(const std::shared_ptr<const Grid>& grid, const Point& x) {
  auto ranges = box_ranges(*grid, Box(x, x));
  std::vector<std::size_t> idx;
  if (ranges) for_each_in_ranges(*grid, *ranges, [&](std::size_t f) { idx.push_back(f); });
  return CellSet(grid, std::move(idx));
}

CellSet closure(const CellSet& s) { return s; }

CellSet interior(const CellSet& s) {
  const Grid& g = s.grid();
  const auto m = s.mask();
  std::vector<std::size_t> out;
  for (auto flat : s.indices()) {
    MultiIndex idx = g.unflatten(flat);
    bool inner = true;
    for (std::size_t axis = 0; axis < g.dim() && inner; ++axis) {
      const std::size_t k = idx[axis];
      if (k == 0 || k + 1 == g.counts()[axis]) {
        inner = false;
        break;
      }
      for (std::size_t nb : {k - 1, k + 1}) {
        idx[axis] = nb;
        if (!m[g.flatten(idx)]) inner = false;
      }
      idx[axis] = k;
    }
    if (inner) out.push_back(flat);
  }
  return CellSet(s.grid_ptr(), std::move(out));
}

CellSet boundary(const CellSet& s) { return s.difference(interior(s)); }

PointList sample_lattice(const Box& b, std::size_t per_axis) {
  if (per_axis == 0) throw std::invalid_argument("samples per axis must be positive");
  const auto m = b.dim();
  PointList pts;
  if (per_axis == 1) {
    pts.push_back(b.center());
    return pts;
  }
  std::size_t total = 1;
  for (Eigen::Index i = 0; i < m; ++i) total *= per_axis;
  pts.reserve(total + 1);
  const double denom = static_cast<double>(per_axis - 1);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Point p(m);
    std::size_t rest = flat;
    for (Eigen::Index i = m - 1; i >= 0; --i) {
      const std::size_t k = rest % per_axis;
      rest /= per_axis;
      // Endpoints are taken verbatim so that corners are exact.
      p[i] = k == 0                  ? b.lower[i]
             : k + 1 == per_axis     ? b.upper[i]
                                     : b.lower[i] + (b.upper[i] - b.lower[i]) * (static_cast<double>(k) / denom);
    }
    pts.push_back(std::move(p));
  }
  if (per_axis % 2 == 0) pts.push_back(b.center());
  return pts;
}

double distance_to_set(const Point& x, const CellSet& s) {
  if (s.empty()) throw std::invalid_argument("distance to an empty cell set is undefined");
  double best = std::numeric_limits<double>::infinity();
  for (auto flat : s.indices()) {
    best = std::min(best, box_distance(x, s.grid().cell_box(flat)));
    if (best == 0.0) break;
  }
  return best;
}

Convergence converges_to(const Trajectory& traj, const CellSet& s, double tol) {
  return converges_to_by(traj, [&](const Point& x) { return distance_to_set(x, s); }, tol);
}

}  // namespace dtsys
