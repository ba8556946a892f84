#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "dtsys/cellset.hpp"
#include "dtsys/system.hpp"

namespace dtsys {

struct LimitSetOptions {
  std::size_t n_total = 10000;
  double burn_in_fraction = 0.8;
  double cluster_tol = 1e-6;
  std::size_t max_period = 64;
  double r_max = kDefaultRMax;
};

struct LimitSetEstimate {
  /// Tail cluster centers in order of first appearance; pairwise more than
  /// 2·cluster_tol apart.
  PointList representatives;
  /// Present only when the tail is periodic with exactly one representative
  /// per orbit point.
  std::optional<std::size_t> period;
  std::optional<CellSet> covering_cells;
  /// Largest distance from a tail sample to its nearest representative.
  double tail_radius = 0.0;
};

class UnboundedMotion : public std::runtime_error {
 public:
  explicit UnboundedMotion(std::size_t step)
      : std::runtime_error("motion is unbounded (diverged at step " + std::to_string(step) + ")"),
        step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Index of the first tail point for a trajectory of `length` points.
std::size_t tail_start(std::size_t length, double burn_in_fraction);

/// Greedy ℓ∞ linkage in point order; clusters whose centers come within
/// 2·tol are merged. Returns cluster centers (member means).
PointList cluster_points(const PointList& points, double tol);

/// Ω(x0) estimated from the trajectory tail. Throws UnboundedMotion.
LimitSetEstimate omega_of_point(const System& sys, const Point& x0, const LimitSetOptions& options = {});
LimitSetEstimate estimate_from_trajectory(const Trajectory& traj, const LimitSetOptions& options = {});

struct Classification {
  enum class Kind { FixedPoint, PeriodicOrbit, Unresolved };
  Kind kind = Kind::Unresolved;
  std::size_t period = 0;
  std::string diagnostic;
};

std::string_view to_string(Classification::Kind k);

Classification classify(const LimitSetEstimate& est, const System& sys, double tol);

struct ApproachReport {
  double sup_distance = 0.0;
  bool approaches = false;
  /// Tail visits to the tol-ball of each candidate point.
  std::vector<std::size_t> visits;
  /// Candidates visited at least three times; removing any of them would
  /// break the approach property.
  PointList minimal_set;
  bool minimal = false;
};

ApproachReport verify_approach(const Trajectory& traj, const PointList& candidate, double tol,
                               double tail_fraction = 0.2);

/// T maps representatives onto representatives and every representative has
/// a representative preimage, both within tol.
bool omega_invariance_check(const LimitSetEstimate& est, const System& sys, double tol);

}  // namespace dtsys
