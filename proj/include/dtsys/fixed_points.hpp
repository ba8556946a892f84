#pragma once

#include <cstddef>
#include <optional>

#include "dtsys/system.hpp"

namespace dtsys {

struct FixedPointResult {
  /// Points with ‖T(x) - x‖∞ <= tol, de-duplicated and sorted lexicographically.
  PointList points;
  /// Set when more than half of the scan cells contain a near-zero residual;
  /// no refinement is attempted in that case.
  bool continuum = false;
};

/// Grid scan of the residual T(x) - x followed by box bisection of every
/// cell whose corner/center residuals bracket zero in each component.
FixedPointResult find_fixed_points(const System& sys, const Box& search, std::size_t grid_n,
                                   double tol);

struct PeriodOptions {
  double tail_fraction = 0.2;
  double tol = 1e-9;
  std::size_t max_period = 64;
};

struct PeriodResult {
  std::size_t period = 0;
  /// The last `period` points of the trajectory, in orbit order.
  PointList cycle;
};

/// Least p <= max_period with ‖x(n+p) - x(n)‖∞ <= tol over the tail window.
std::optional<PeriodResult> detect_period(const Trajectory& traj, const PeriodOptions& options = {});

}  // namespace dtsys
