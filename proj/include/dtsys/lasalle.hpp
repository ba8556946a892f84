#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dtsys/cellset.hpp"
#include "dtsys/set_dynamics.hpp"
#include "dtsys/system.hpp"

namespace dtsys {

/// ΔV(x) = V(T(x)) - V(x).
double delta_V(const System& sys, const Point& x);

struct DescentViolation {
  Point point;
  double delta = 0.0;
};

struct DescentAudit {
  std::size_t samples = 0;
  /// Exactly the samples with ΔV > descent_tol, in sampling order.
  std::vector<DescentViolation> violations;
  double max_delta = -std::numeric_limits<double>::infinity();
  Point worst;

  bool holds() const { return violations.empty(); }
};

/// ΔV on a sample lattice inside every cell of g.
DescentAudit check_descent(const System& sys, const CellSet& g, std::size_t samples_per_cell = 3,
                           double descent_tol = 1e-12);

/// Cells of g with a sample where |ΔV| <= zero_tol.
CellSet e_set(const System& sys, const CellSet& g, double zero_tol, std::size_t samples_per_cell = 3);

/// Cells of g meeting V⁻¹(c): a sample with |V - c| <= level_tol, or samples
/// on both sides of c.
CellSet level_set_cells(const System& sys, double c, double level_tol, const CellSet& g,
                        std::size_t samples_per_cell = 3);

/// 1e-9 · (1 + max |V| over the samples of g).
double default_zero_tol(const System& sys, const CellSet& g, std::size_t samples_per_cell = 3);
/// 1e-6 · (1 + max |V| over the samples of g).
double default_level_tol(const System& sys, const CellSet& g, std::size_t samples_per_cell = 3);

struct LasalleOptions {
  std::size_t cells_per_axis = kDefaultCellsPerAxis;
  std::size_t samples_per_cell = 3;
  std::size_t n_total = 10000;
  double burn_in = 0.8;
  double descent_tol = 1e-12;
  std::optional<double> zero_tol;
  std::optional<double> level_tol;
  double approach_tol = 1e-6;
  double r_max = kDefaultRMax;
  ImageConfig image;
  std::optional<std::size_t> max_iters;
};

enum class Verdict { Converged, ViolatedDescent, LeftG, LeftGc, Diverged, Inconclusive };

std::string_view to_string(Verdict v);

struct TrajectoryVerdict {
  Point x0;
  Verdict verdict = Verdict::Inconclusive;
  /// Entry index for Converged, offending step for hypothesis failures.
  std::optional<std::size_t> step;
  std::optional<double> c;
  double c_tail_min = 0.0;
  double c_tail_stddev = 0.0;
  std::optional<CellSet> target;
  std::string note;
};

enum class LasalleMode { Classic, Extension };

std::string_view to_string(LasalleMode m);

struct LasalleReport {
  LasalleMode mode = LasalleMode::Classic;
  DescentAudit audit;
  std::shared_ptr<const Grid> grid;  // grid of the E/M/target cell sets
  std::optional<CellSet> e_cells;
  std::optional<CellSet> m_cells;
  IterationStatus m_status = IterationStatus::Converged;
  double zero_tol = 0.0;
  double level_tol = 0.0;
  std::optional<std::size_t> extension_n;
  std::optional<Box> g_box;
  std::optional<Box> gc_box;
  std::vector<TrajectoryVerdict> verdicts;
  std::vector<std::string> assumptions;

  bool violated_descent() const { return !audit.holds(); }
};

/// Invariance-principle check on G: audit ΔV <= 0, build E, its invariant
/// part M, and test each motion's convergence to M ∩ V⁻¹(c).
LasalleReport lasalle_analyze(const System& sys, const Box& g, const PointList& x0s,
                              const LasalleOptions& options = {});

/// Variant where motions need only stay in a compact G_c ⊆ G from step N on;
/// E is built over G_c.
LasalleReport lasalle_extension_analyze(const System& sys, const Box& g, const Box& gc, std::size_t n,
                                        const PointList& x0s, const LasalleOptions& options = {});

}  // namespace dtsys
