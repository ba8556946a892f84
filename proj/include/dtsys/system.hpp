#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dtsys/expr.hpp"
#include "dtsys/types.hpp"

namespace dtsys {

/// Motions with ‖x‖∞ above this are declared unbounded.
inline constexpr double kDefaultRMax = 1e12;

/// State variable names x1..xm.
std::vector<std::string> state_names(std::size_t dim);

/// A first-order system x(n+1) = T(x(n)) on R^m, with an optional Lyapunov
/// candidate V and an optional domain box G.
class System {
 public:
  System(std::vector<Expression> components, Environment params = {},
         std::optional<Expression> lyapunov = std::nullopt, std::optional<Box> domain = std::nullopt,
         std::string name = {});

  std::size_t dim() const { return components_.size(); }
  const std::vector<Expression>& components() const { return components_; }
  const Environment& params() const { return params_; }
  const std::optional<Expression>& lyapunov() const { return lyapunov_; }
  const std::optional<Box>& domain() const { return domain_; }
  const std::string& name() const { return name_; }

  /// T(x); every component reads the same input (simultaneous update).
  Point map(const Point& x) const;
  void map(std::span<const double> x, std::span<double> out) const;

  double lyapunov_value(std::span<const double> x) const;
  double lyapunov_value(const Point& x) const {
    return lyapunov_value(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  }

  System with_lyapunov(Expression v) const;
  System with_domain(Box b) const;

 private:
  std::vector<Expression> components_;
  Environment params_;
  std::optional<Expression> lyapunov_;
  std::optional<Box> domain_;
  std::string name_;
  std::vector<CompiledExpression> compiled_;
  CompiledExpression compiled_lyapunov_;
};

Point step(const System& sys, const Point& x);

/// True when x is non-finite or ‖x‖∞ > r_max.
bool is_divergent(const Point& x, double r_max = kDefaultRMax);

struct Trajectory {
  PointList points;
  /// Index of the first step that produced a divergent point; that point is
  /// not stored.
  std::optional<std::size_t> diverged_at;

  bool diverged() const { return diverged_at.has_value(); }
  const Point& last() const { return points.back(); }
};

Trajectory trajectory(const System& sys, const Point& x0, std::size_t steps,
                      double r_max = kDefaultRMax);

/// u(n+1) = g(u(n), ..., u(n-k+1)) with u1 the newest value and uk the oldest.
struct HigherOrderSpec {
  std::size_t order = 1;
  Expression g;
  Environment params;
  std::vector<double> initial;  // u(0), ..., u(k-1)
};

struct LiftedSystem {
  System system;
  Point initial;  // (u(k-1), ..., u(0))
};

/// First-order state-space form: x1 = u(n), ..., xk = u(n-k+1).
LiftedSystem lift(const HigherOrderSpec& spec);

/// ℓ∞ distance from x to the nearest point of a non-empty finite set.
double distance_to_set(const Point& x, const PointList& set);

struct Convergence {
  bool converged = false;
  /// First index after which every point stays within tolerance.
  std::size_t entry_index = 0;
};

/// Finite-horizon convergence: the trajectory must end within tol of the set
/// and entry_index reports where it last entered for good.
template <typename DistanceFn>
Convergence converges_to_by(const Trajectory& traj, DistanceFn&& distance, double tol) {
  Convergence c;
  if (traj.points.empty() || traj.diverged()) return c;
  std::size_t n = traj.points.size();
  while (n > 0 && distance(traj.points[n - 1]) <= tol) --n;
  c.converged = n < traj.points.size();
  c.entry_index = n;
  return c;
}

Convergence converges_to(const Trajectory& traj, const PointList& set, double tol);

}  // namespace dtsys
