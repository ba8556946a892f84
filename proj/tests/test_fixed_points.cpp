#include <doctest.h>

#include "dtsys/fixed_points.hpp"

using namespace dtsys;

namespace {

System blend() { return System({parse("eps*x1^2 + (1 - eps)*x1")}, Environment{{"eps", 0.5}}); }

}  // namespace

TEST_CASE("blend map has fixed points 0 and 1") {
  const auto r = find_fixed_points(blend(), make_box({-0.5}, {1.5}), 64, 1e-9);
  REQUIRE(r.points.size() == 2);
  CHECK(std::abs(r.points[0][0]) <= 1e-9);
  CHECK(std::abs(r.points[1][0] - 1.0) <= 1e-9);
  for (const auto& p : r.points) CHECK(linf_distance(blend().map(p), p) <= 1e-9);
}

TEST_CASE("fixed points of simple maps") {
  const System half({parse("0.5*x1")});
  const auto r = find_fixed_points(half, make_box({-1}, {1}), 32, 1e-10);
  REQUIRE(r.points.size() == 1);
  CHECK(std::abs(r.points[0][0]) <= 1e-10);

  const System id({parse("x1"), parse("x2")});
  const auto c = find_fixed_points(id, make_box({0, 0}, {1, 1}), 8, 1e-9);
  CHECK(c.continuum);

  const System shift({parse("x1 + 1")});
  CHECK(find_fixed_points(shift, make_box({-1}, {1}), 16, 1e-9).points.empty());
}

TEST_CASE("fixed points in two dimensions") {
  // Rotation-contraction about (0.3, -0.2).
  const System sys({parse("0.3 + 0.5*(x2 + 0.2)"), parse("-0.2 - 0.5*(x1 - 0.3)")});
  const auto r = find_fixed_points(sys, make_box({-1, -1}, {1, 1}), 16, 1e-9);
  REQUIRE(r.points.size() == 1);
  CHECK(linf_distance(r.points[0], make_point({0.3, -0.2})) <= 1e-8);
}

TEST_CASE("search must lie in the domain") {
  const System sys = blend().with_domain(make_box({0}, {1}));
  CHECK_THROWS_AS(find_fixed_points(sys, make_box({-0.5}, {1.5}), 16, 1e-9), std::invalid_argument);
}

TEST_CASE("detect_period") {
  const System quarter({parse("-x2"), parse("x1")});
  const auto p = detect_period(trajectory(quarter, make_point({1, 0}), 100));
  REQUIRE(p);
  CHECK(p->period == 4);
  CHECK(p->cycle.size() == 4);

  const System half({parse("0.5*x1")});
  const auto q = detect_period(trajectory(half, make_point({1}), 200));
  REQUIRE(q);
  CHECK(q->period == 1);

  // Irrational rotation never repeats.
  const System rot({parse("cos(1)*x1 - sin(1)*x2"), parse("sin(1)*x1 + cos(1)*x2")});
  CHECK_FALSE(detect_period(trajectory(rot, make_point({1, 0}), 500)));
}

TEST_CASE("property: detected period is minimal") {
  for (std::size_t k = 1; k <= 8; ++k) {
    std::vector<Expression> comps{Expression::variable("x" + std::to_string(k))};
    for (std::size_t i = 2; i <= k; ++i) comps.push_back(Expression::variable("x" + std::to_string(i - 1)));
    Point x0(static_cast<Eigen::Index>(k));
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0[i] = static_cast<double>(i * i);
    const auto p = detect_period(trajectory(System(comps), x0, 200));
    REQUIRE(p);
    CHECK(p->period == k);
  }
}
