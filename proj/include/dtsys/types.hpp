#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace dtsys {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Point = VectorX<double>;
using PointList = std::vector<Point>;

/// Axis-aligned closed box [lower, upper].
template <typename Scalar>
struct BoxT {
  VectorX<Scalar> lower;
  VectorX<Scalar> upper;

  BoxT() = default;
  BoxT(VectorX<Scalar> lo, VectorX<Scalar> hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) throw std::invalid_argument("box bounds differ in dimension");
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      if (!(lower[i] <= upper[i])) throw std::invalid_argument("box lower bound exceeds upper");
    }
  }

  Eigen::Index dim() const { return lower.size(); }
  VectorX<Scalar> center() const { return (lower + upper) / Scalar(2); }
  VectorX<Scalar> widths() const { return upper - lower; }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& x) const {
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }

  bool contains(const BoxT& other) const {
    return (other.lower.array() >= lower.array()).all() &&
           (other.upper.array() <= upper.array()).all();
  }
};

using Box = BoxT<double>;

template <typename Derived>
typename Derived::Scalar linf_norm(const Eigen::MatrixBase<Derived>& v) {
  return v.size() == 0 ? typename Derived::Scalar(0) : v.template lpNorm<Eigen::Infinity>();
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar linf_distance(const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedB>& b) {
  return linf_norm(a - b);
}

/// ℓ∞ distance from a point to a closed box; zero inside.
template <typename Derived, typename Scalar>
Scalar box_distance(const Eigen::MatrixBase<Derived>& x, const BoxT<Scalar>& b) {
  Scalar d(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    d = std::max({d, b.lower[i] - x[i], x[i] - b.upper[i]});
  }
  return d;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  return v.allFinite();
}

inline Point make_point(std::initializer_list<double> values) {
  Point p(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) p[i++] = v;
  return p;
}

inline Box make_box(std::initializer_list<double> lower, std::initializer_list<double> upper) {
  return Box(make_point(lower), make_point(upper));
}

}  // namespace dtsys
