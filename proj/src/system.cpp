#include "dtsys/system.hpp"

#include <algorithm>

namespace dtsys {

std::vector<std::string> state_names(std::size_t dim) {
  std::vector<std::string> names;
  names.reserve(dim);
  for (std::size_t i = 1; i <= dim; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

namespace {

void check_covered(const Expression& e, const std::vector<std::string>& states,
                   const Environment& params, const std::string& what) {
  for (const auto& v : free_variables(e)) {
    if (std::find(states.begin(), states.end(), v) != states.end()) continue;
    if (params.contains(v)) continue;
    throw std::invalid_argument(what + " references unknown variable '" + v + "'");
  }
}

}  // namespace

System::System(std::vector<Expression> components, Environment params,
               std::optional<Expression> lyapunov, std::optional<Box> domain, std::string name)
    : components_(std::move(components)),
      params_(std::move(params)),
      lyapunov_(std::move(lyapunov)),
      domain_(std::move(domain)),
      name_(std::move(name)) {
  if (components_.empty()) throw std::invalid_argument("system needs at least one component");
  const auto states = state_names(dim());
  for (const auto& s : states) {
    if (params_.contains(s)) {
      throw std::invalid_argument("parameter name '" + s + "' collides with a state variable");
    }
  }
  for (std::size_t i = 0; i < components_.size(); ++i) {
    check_covered(components_[i], states, params_, "component " + std::to_string(i + 1));
    compiled_.emplace_back(components_[i], states, params_);
  }
  if (lyapunov_) {
    check_covered(*lyapunov_, states, params_, "lyapunov function");
    compiled_lyapunov_ = CompiledExpression(*lyapunov_, states, params_);
  }
  if (domain_ && static_cast<std::size_t>(domain_->dim()) != dim()) {
    throw std::invalid_argument("domain dimension does not match system dimension");
  }
}

Point System::map(const Point& x) const {
  Point out(x.size());
  map(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
      std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

void System::map(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim() || out.size() != dim()) {
    throw std::invalid_argument("point dimension does not match system dimension");
  }
  for (std::size_t i = 0; i < compiled_.size(); ++i) out[i] = compiled_[i](x);
}

double System::lyapunov_value(std::span<const double> x) const {
  if (!lyapunov_) throw std::logic_error("system has no lyapunov function");
  if (x.size() != dim()) throw std::invalid_argument("point dimension does not match system");
  return compiled_lyapunov_(x);
}

System System::with_lyapunov(Expression v) const {
  return System(components_, params_, std::move(v), domain_, name_);
}

System System::with_domain(Box b) const {
  return System(components_, params_, lyapunov_, std::move(b), name_);
}

Point step(const System& sys, const Point& x) { return sys.map(x); }

bool is_divergent(const Point& x, double r_max) {
  return !x.allFinite() || linf_norm(x) > r_max;
}

Trajectory trajectory(const System& sys, const Point& x0, std::size_t steps, double r_max) {
  if (static_cast<std::size_t>(x0.size()) != sys.dim()) {
    throw std::invalid_argument("initial point dimension does not match system dimension");
  }
  Trajectory traj;
  if (is_divergent(x0, r_max)) {
    traj.diverged_at = 0;
    return traj;
  }
  traj.points.reserve(steps + 1);
  traj.points.push_back(x0);
  for (std::size_t n = 1; n <= steps; ++n) {
    Point next = sys.map(traj.points.back());
    if (is_divergent(next, r_max)) {
      traj.diverged_at = n;
      break;
    }
    traj.points.push_back(std::move(next));
  }
  return traj;
}

LiftedSystem lift(const HigherOrderSpec& spec) {
  const std::size_t k = spec.order;
  if (k == 0) throw std::invalid_argument("recurrence order must be positive");
  if (spec.initial.size() != k) {
    throw std::invalid_argument("recurrence of order " + std::to_string(k) + " needs " +
                                std::to_string(k) + " initial values");
  }
  std::map<std::string, Expression> rename;
  for (std::size_t i = 1; i <= k; ++i) {
    rename.emplace("u" + std::to_string(i), Expression::variable("x" + std::to_string(i)));
  }
  for (const auto& v : free_variables(spec.g)) {
    if (rename.count(v) || spec.params.contains(v)) continue;
    throw std::invalid_argument("recurrence of order " + std::to_string(k) +
                                " references unknown variable '" + v + "'");
  }
  std::vector<Expression> components;
  components.push_back(substitute(spec.g, rename));
  for (std::size_t i = 2; i <= k; ++i) {
    components.push_back(Expression::variable("x" + std::to_string(i - 1)));
  }
  Point x0(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) x0[static_cast<Eigen::Index>(i)] = spec.initial[k - 1 - i];
  return {System(std::move(components), spec.params), std::move(x0)};
}

double distance_to_set(const Point& x, const PointList& set) {
  if (set.empty()) throw std::invalid_argument("distance to an empty set is undefined");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& y : set) best = std::min(best, linf_distance(x, y));
  return best;
}

Convergence converges_to(const Trajectory& traj, const PointList& set, double tol) {
  return converges_to_by(traj, [&](const Point& x) { return distance_to_set(x, set); }, tol);
}

}  // namespace dtsys
