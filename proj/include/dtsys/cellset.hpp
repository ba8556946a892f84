#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "dtsys/system.hpp"
#include "dtsys/types.hpp"

namespace dtsys {

inline constexpr std::size_t kDefaultCellsPerAxis = 256;

using MultiIndex = std::vector<std::size_t>;

/// Uniform tiling of a box. Cells are closed boxes indexed row-major with
/// axis 0 slowest, so sorted flat indices are sorted multi-indices.
class Grid {
 public:
  Grid(Box box, std::vector<std::size_t> counts);
  Grid(Box box, std::size_t per_axis);

  const Box& box() const { return box_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t dim() const { return counts_.size(); }
  std::size_t size() const { return size_; }
  const Point& cell_width() const { return width_; }

  std::size_t flatten(const MultiIndex& idx) const;
  MultiIndex unflatten(std::size_t flat) const;

  double cell_lower(std::size_t axis, std::size_t k) const;
  double cell_upper(std::size_t axis, std::size_t k) const;
  Box cell_box(std::size_t flat) const;

  /// Inclusive index range on one axis of the cells overlapping [a, b].
  /// For a < b a cell counts when its interior meets the interval; for a
  /// degenerate interval every closed cell containing the point counts.
  std::optional<std::pair<std::size_t, std::size_t>> axis_range(std::size_t axis, double a,
                                                                double b) const;

  bool operator==(const Grid& other) const;

 private:
  Box box_;
  std::vector<std::size_t> counts_;
  Point width_;
  std::size_t size_ = 1;
};

/// Finite union of grid cells. Immutable value; indices kept sorted and unique.
class CellSet {
 public:
  explicit CellSet(std::shared_ptr<const Grid> grid);
  CellSet(std::shared_ptr<const Grid> grid, std::vector<std::size_t> indices);

  static CellSet full(std::shared_ptr<const Grid> grid);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(std::size_t flat) const;

  /// Dense membership mask over the whole grid.
  std::vector<char> mask() const;
  static CellSet from_mask(std::shared_ptr<const Grid> grid, const std::vector<char>& mask);

  CellSet unite(const CellSet& other) const;
  CellSet intersect(const CellSet& other) const;
  CellSet difference(const CellSet& other) const;
  bool subset_of(const CellSet& other) const;

  bool operator==(const CellSet& other) const;

 private:
  void check_same_grid(const CellSet& other) const;

  std::shared_ptr<const Grid> grid_;
  std::vector<std::size_t> indices_;
};

/// Cells overlapping b (interior overlap on non-degenerate axes, closed
/// containment on degenerate ones). Throws if b misses the grid box.
CellSet cells_of_box(const std::shared_ptr<const Grid>& grid, const Box& b);

/// Closed cells containing x; empty when x is outside the grid box.
CellSet cells_containing(const std::shared_ptr<const Grid>& grid, const Point& x);

CellSet closure(const CellSet& s);
/// Cells whose 2m face neighbours all lie in s. Neighbours outside the grid
/// count as missing.
CellSet interior(const CellSet& s);
CellSet boundary(const CellSet& s);

/// Regular lattice of per_axis points per axis covering b, corners included;
/// the center is appended when per_axis is even. Row-major order.
PointList sample_lattice(const Box& b, std::size_t per_axis);

double distance_to_set(const Point& x, const CellSet& s);
Convergence converges_to(const Trajectory& traj, const CellSet& s, double tol);

}  // namespace dtsys
