#include <cmath>

#include <doctest.h>

#include "dtsys/fixed_points.hpp"
#include "dtsys/lasalle.hpp"
#include "dtsys/limitset.hpp"
#include "oracles.hpp"

using namespace dtsys;

namespace {

System blend_v(const std::string& v = "x1") {
  return System({parse("eps*x1^2 + (1 - eps)*x1")}, Environment{{"eps", 0.5}}, parse(v));
}
System half_v() { return System({parse("0.5*x1")}, {}, parse("x1^2")); }
System double_v() { return System({parse("2*x1")}, {}, parse("x1^2")); }

CellSet all_cells(const Box& b, std::size_t n) { return CellSet::full(std::make_shared<const Grid>(b, n)); }

bool incident(const CellSet& s, double x) {
  for (auto c : s.indices()) {
    if (!s.grid().cell_box(c).contains(make_point({x}))) return false;
  }
  return !s.empty();
}

void check_chain(const LasalleReport& r) {
  REQUIRE(r.e_cells);
  REQUIRE(r.m_cells);
  CHECK(r.m_cells->subset_of(*r.e_cells));
  for (const auto& v : r.verdicts) {
    if (v.target) CHECK(v.target->subset_of(*r.m_cells));
  }
}

}  // namespace

TEST_CASE("delta_V") {
  CHECK(delta_V(half_v(), make_point({1})) == -0.75);
  CHECK(delta_V(blend_v(), make_point({0.5})) == oracle::blend_delta_v(0.5, 0.5));
  CHECK(delta_V(blend_v(), make_point({1})) == 0.0);
  CHECK_THROWS(delta_V(System({parse("x1")}), make_point({1})));
}

TEST_CASE("descent audit") {
  const auto g = all_cells(make_box({-1}, {1}), 64);
  CHECK(check_descent(half_v(), g).holds());
  CHECK(check_descent(blend_v(), all_cells(make_box({0}, {1}), 64)).holds());
  const auto bad = check_descent(double_v(), g);
  CHECK_FALSE(bad.holds());
  CHECK(bad.samples == 64 * 3);
  for (const auto& v : bad.violations) CHECK(v.point[0] != 0.0);
  CHECK(bad.max_delta == 3.0);
  CHECK(std::abs(bad.worst[0]) == 1.0);
}

TEST_CASE("E sets") {
  const auto g = all_cells(make_box({-1}, {1}), 256);
  CHECK(incident(e_set(half_v(), g, 1e-9), 0.0));
  const auto u = all_cells(make_box({0}, {1}), 256);
  const auto e = e_set(blend_v(), u, default_zero_tol(blend_v(), u));
  CHECK(e.indices() == std::vector<std::size_t>{0, 255});
  const System id({parse("x1")}, {}, parse("x1^3"));
  CHECK(e_set(id, g, 1e-12) == g);
}

TEST_CASE("level set cells") {
  const auto g = all_cells(make_box({-1}, {1}), 64);
  CHECK(incident(level_set_cells(half_v(), 0.0, 1e-9, g), 0.0));
  const auto u = all_cells(make_box({0}, {1}), 64);
  CHECK(level_set_cells(blend_v(), 1.0, 1e-9, u).indices() == std::vector<std::size_t>{63});

  // Circle of radius 0.5: a cell meets it iff its nearest point is inside the
  // circle and its farthest point outside (Euclidean geometry oracle).
  auto grid = std::make_shared<const Grid>(make_box({-1, -1}, {1, 1}), 16);
  const System circle({parse("x1"), parse("x2")}, {}, parse("x1^2 + x2^2"));
  const auto cells = level_set_cells(circle, 0.25, 1e-12, CellSet::full(grid));
  for (std::size_t c = 0; c < grid->size(); ++c) {
    const Box b = grid->cell_box(c);
    double near2 = 0, far2 = 0;
    for (Eigen::Index i = 0; i < 2; ++i) {
      const double lo = b.lower[i], hi = b.upper[i];
      const double n = lo > 0 ? lo : (hi < 0 ? -hi : 0.0);
      const double f = std::max(std::abs(lo), std::abs(hi));
      near2 += n * n;
      far2 += f * f;
    }
    const bool meets = near2 <= 0.25 && far2 >= 0.25;
    INFO("cell " << c);
    CHECK(cells.contains(c) == meets);
  }
}

TEST_CASE("classic analysis") {
  const auto r = lasalle_analyze(half_v(), make_box({-1}, {1}), {make_point({1})});
  REQUIRE(r.verdicts.size() == 1);
  CHECK(r.verdicts[0].verdict == Verdict::Converged);
  CHECK(*r.verdicts[0].c == 0.0);
  CHECK(incident(*r.verdicts[0].target, 0.0));
  check_chain(r);

  const auto rr = lasalle_analyze(blend_v(), make_box({0}, {1}), {make_point({0.5}), make_point({1})});
  CHECK(rr.verdicts[0].verdict == Verdict::Converged);
  CHECK(incident(*rr.verdicts[0].target, 0.0));
  CHECK(*rr.verdicts[1].c == 1.0);
  CHECK(incident(*rr.verdicts[1].target, 1.0));
  check_chain(rr);
}

TEST_CASE("hypothesis failures") {
  const auto bad = lasalle_analyze(double_v(), make_box({-1}, {1}), {make_point({0.5})});
  CHECK(bad.violated_descent());
  CHECK(bad.verdicts[0].verdict == Verdict::ViolatedDescent);

  // V = -x^2 decreases under doubling, so only the region hypothesis fails.
  const System grow({parse("2*x1")}, {}, parse("-x1^2"));
  const auto left = lasalle_analyze(grow, make_box({-1}, {1}), {make_point({0.1})});
  CHECK(left.verdicts[0].verdict == Verdict::LeftG);
  CHECK(left.verdicts[0].step == std::optional<std::size_t>(4));  // 0.1*2^4 = 1.6

  const auto huge = lasalle_analyze(grow, make_box({-1e13}, {1e13}), {make_point({0.1})}, {64});
  CHECK(huge.verdicts[0].verdict == Verdict::Diverged);
  CHECK_THROWS(lasalle_analyze(System({parse("x1")}), make_box({0}, {1}), {make_point({0.5})}));
}

TEST_CASE("extension analysis") {
  const auto r = lasalle_extension_analyze(half_v(), make_box({-2}, {2}), make_box({-1}, {1}), 1,
                                           {make_point({1.9})});
  CHECK(r.mode == LasalleMode::Extension);
  CHECK(r.verdicts[0].verdict == Verdict::Converged);
  CHECK(incident(*r.verdicts[0].target, 0.0));
  check_chain(r);

  const System grow({parse("2*x1")}, {}, parse("-x1^2"));
  const auto left = lasalle_extension_analyze(grow, make_box({-10}, {10}), make_box({-1}, {1}), 5,
                                              {make_point({0.1})});
  CHECK(left.verdicts[0].verdict == Verdict::LeftGc);

  const System flat({parse("x1")}, {}, parse("1"));
  const auto id = lasalle_extension_analyze(flat, make_box({-2}, {2}), make_box({-1}, {1}), 0,
                                            {make_point({0.3})}, {32});
  CHECK(id.verdicts[0].verdict == Verdict::Converged);
  CHECK(*id.verdicts[0].c == 1.0);
  CHECK(id.verdicts[0].target->size() == 32);
  CHECK_THROWS(lasalle_extension_analyze(half_v(), make_box({-1}, {1}), make_box({-2}, {2}), 0, {make_point({0})}));
}

TEST_CASE("property: V is non-increasing along audited motions") {
  const auto sys = blend_v();
  const auto g = all_cells(make_box({0}, {1}), 64);
  REQUIRE(check_descent(sys, g).holds());
  for (double x0 = 0.0; x0 <= 1.0; x0 += 0.05) {
    const auto tr = trajectory(sys, make_point({x0}), 500);
    for (std::size_t n = 1; n < tr.points.size(); ++n) {
      CHECK(sys.lyapunov_value(tr.points[n]) <= sys.lyapunov_value(tr.points[n - 1]) + 1e-12);
    }
  }
}

TEST_CASE("property: tail mean and tail min of V agree") {
  const auto r = lasalle_analyze(blend_v(), make_box({0}, {1}), {make_point({0.3}), make_point({0.95})});
  for (const auto& v : r.verdicts) {
    const std::size_t tail_len = 10001 - tail_start(10001, 0.8);
    CHECK(std::abs(*v.c - v.c_tail_min) <= 1e-12 * static_cast<double>(tail_len));
  }
}

TEST_CASE("property: fixed points in G lie in E") {
  const auto sys = blend_v();
  const auto g = all_cells(make_box({0}, {1}), 128);
  const auto e = e_set(sys, g, default_zero_tol(sys, g));
  for (const auto& p : find_fixed_points(sys, make_box({0}, {1}), 64, 1e-12).points) {
    CHECK(delta_V(sys, p) == 0.0);
    CHECK(distance_to_set(p, e) == 0.0);
  }
}

TEST_CASE("property: scaling V leaves E, verdicts and targets unchanged") {
  const PointList x0s{make_point({0.2}), make_point({0.7}), make_point({1})};
  const auto base = lasalle_analyze(blend_v(), make_box({0}, {1}), x0s, {128});
  for (double k : {0.01, 3.0, 250.0}) {
    const auto scaled = lasalle_analyze(blend_v(std::to_string(k) + "*x1"), make_box({0}, {1}), x0s, {128});
    CHECK(*scaled.e_cells == *base.e_cells);
    CHECK(*scaled.m_cells == *base.m_cells);
    for (std::size_t i = 0; i < x0s.size(); ++i) {
      CHECK(scaled.verdicts[i].verdict == base.verdicts[i].verdict);
      CHECK(*scaled.verdicts[i].target == *base.verdicts[i].target);
    }
  }
}
