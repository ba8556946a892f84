#include "dtsys/limitset.hpp"

#include <algorithm>
#include <cmath>

#include "dtsys/fixed_points.hpp"
#include "dtsys/set_dynamics.hpp"

namespace dtsys {

std::size_t tail_start(std::size_t length, double burn_in_fraction) {
  if (length == 0) return 0;
  const double f = std::clamp(burn_in_fraction, 0.0, 1.0);
  const auto start = static_cast<std::size_t>(std::floor(f * static_cast<double>(length - 1)));
  return std::min(start, length - 1);
}

PointList cluster_points(const PointList& points, double tol) {
  struct Cluster {
    Point seed;
    Point sum;
    std::size_t count;
    bool uniform;  // every member equals seed bitwise
  };
  std::vector<Cluster> clusters;
  for (const auto& p : points) {
    auto it = std::find_if(clusters.begin(), clusters.end(),
                           [&](const Cluster& c) { return linf_distance(p, c.seed) <= tol; });
    if (it == clusters.end()) {
      clusters.push_back({p, p, 1, true});
    } else {
      it->sum += p;
      ++it->count;
      it->uniform = it->uniform && p == it->seed;
    }
  }
  auto center = [](const Cluster& c) -> Point {
    return c.uniform ? c.seed : Point(c.sum / static_cast<double>(c.count));
  };

  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < clusters.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < clusters.size() && !merged; ++j) {
        if (linf_distance(center(clusters[i]), center(clusters[j])) <= 2 * tol) {
          clusters[i].sum += clusters[j].sum;
          clusters[i].count += clusters[j].count;
          clusters[i].uniform =
              clusters[i].uniform && clusters[j].uniform && clusters[i].seed == clusters[j].seed;
          clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
        }
      }
    }
  }
  PointList centers;
  centers.reserve(clusters.size());
  for (const auto& c : clusters) centers.push_back(center(c));
  return centers;
}

LimitSetEstimate estimate_from_trajectory(const Trajectory& traj, const LimitSetOptions& options) {
  if (traj.diverged()) throw UnboundedMotion(*traj.diverged_at);
  if (traj.points.empty()) throw std::invalid_argument("empty trajectory");
  const std::size_t start = tail_start(traj.points.size(), options.burn_in_fraction);
  const PointList tail(traj.points.begin() + static_cast<std::ptrdiff_t>(start), traj.points.end());

  LimitSetEstimate est;
  est.representatives = cluster_points(tail, options.cluster_tol);
  for (const auto& p : tail) {
    est.tail_radius = std::max(est.tail_radius, distance_to_set(p, est.representatives));
  }

  PeriodOptions po;
  po.tail_fraction = static_cast<double>(tail.size()) / static_cast<double>(traj.points.size());
  po.tol = options.cluster_tol;
  po.max_period = options.max_period;
  if (auto period = detect_period(traj, po)) {
    if (period->period == est.representatives.size()) est.period = period->period;
  }
  return est;
}

LimitSetEstimate omega_of_point(const System& sys, const Point& x0, const LimitSetOptions& options) {
  return estimate_from_trajectory(trajectory(sys, x0, options.n_total, options.r_max), options);
}

std::string_view to_string(Classification::Kind k) {
  switch (k) {
    case Classification::Kind::FixedPoint: return "fixed_point";
    case Classification::Kind::PeriodicOrbit: return "periodic_orbit";
    case Classification::Kind::Unresolved: return "unresolved";
  }
  return "?";
}

Classification classify(const LimitSetEstimate& est, const System& sys, double tol) {
  Classification c;
  const auto& reps = est.representatives;
  if (reps.empty()) {
    c.diagnostic = "empty estimate";
    return c;
  }
  if (reps.size() == 1) {
    const double residual = linf_distance(sys.map(reps[0]), reps[0]);
    if (residual <= tol) {
      c.kind = Classification::Kind::FixedPoint;
      c.period = 1;
    } else {
      c.diagnostic = "single representative is not a fixed point";
    }
    return c;
  }
  try {
    if (is_invariantly_connected_finite(sys, reps, tol)) {
      c.kind = Classification::Kind::PeriodicOrbit;
      c.period = reps.size();
    } else {
      c.diagnostic = "not invariantly connected";
    }
  } catch (const NotInvariantError& e) {
    c.diagnostic = std::string("representatives not invariant: ") + e.what();
  }
  return c;
}

ApproachReport verify_approach(const Trajectory& traj, const PointList& candidate, double tol,
                               double tail_fraction) {
  ApproachReport r;
  if (traj.points.empty() || candidate.empty()) return r;
  const std::size_t start = tail_start(traj.points.size(), 1.0 - tail_fraction);
  r.visits.assign(candidate.size(), 0);
  for (std::size_t n = start; n < traj.points.size(); ++n) {
    const Point& x = traj.points[n];
    r.sup_distance = std::max(r.sup_distance, distance_to_set(x, candidate));
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (linf_distance(x, candidate[i]) <= tol) ++r.visits[i];
    }
  }
  r.approaches = r.sup_distance <= tol;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (r.visits[i] >= 3) r.minimal_set.push_back(candidate[i]);
  }
  r.minimal = r.minimal_set.size() == candidate.size();
  return r;
}

bool omega_invariance_check(const LimitSetEstimate& est, const System& sys, double tol) {
  const auto& reps = est.representatives;
  if (reps.empty()) return false;
  PointList images;
  images.reserve(reps.size());
  for (const auto& r : reps) images.push_back(sys.map(r));
  for (const auto& y : images) {
    if (distance_to_set(y, reps) > tol) return false;
  }
  for (const auto& r : reps) {
    if (distance_to_set(r, images) > tol) return false;
  }
  return true;
}

}  // namespace dtsys
