#include <random>

#include <doctest.h>

#include "dtsys/cellset.hpp"

using namespace dtsys;

namespace {

std::shared_ptr<const Grid> grid2(std::size_t n) {
  return std::make_shared<const Grid>(make_box({0, 0}, {1, 1}), n);
}

CellSet block(const std::shared_ptr<const Grid>& g, std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1) {
  std::vector<std::size_t> idx;
  for (std::size_t i = i0; i <= i1; ++i) {
    for (std::size_t j = j0; j <= j1; ++j) idx.push_back(g->flatten({i, j}));
  }
  return CellSet(g, idx);
}

}  // namespace

TEST_CASE("grid indexing is row-major with axis 0 slowest") {
  const Grid g(make_box({0, 0}, {1, 2}), std::vector<std::size_t>{4, 8});
  CHECK(g.size() == 32);
  CHECK(g.flatten({0, 1}) == 1);
  CHECK(g.flatten({1, 0}) == 8);
  CHECK(g.unflatten(27) == MultiIndex{3, 3});
  const Box b = g.cell_box(g.flatten({1, 3}));
  CHECK(b.lower == make_point({0.25, 0.75}));
  CHECK(b.upper == make_point({0.5, 1.0}));
  CHECK(g.cell_upper(0, 3) == 1.0);
  CHECK_THROWS(Grid(make_box({0}, {1}), std::vector<std::size_t>{0}));
  CHECK_THROWS(Grid(make_box({0}, {0}), 4));
}

TEST_CASE("cells_of_box") {
  auto g1 = std::make_shared<const Grid>(make_box({0}, {1}), 4);
  CHECK(cells_of_box(g1, make_box({0}, {0.5})).indices() == std::vector<std::size_t>{0, 1});
  CHECK(cells_of_box(g1, make_box({0}, {1})).size() == 4);
  CHECK(cells_of_box(g1, make_box({0.5}, {0.5})).indices() == std::vector<std::size_t>{1, 2});
  CHECK_THROWS(cells_of_box(g1, make_box({2}, {3})));
  auto g = grid2(4);
  const auto vertex = cells_of_box(g, make_box({0.5, 0.25}, {0.5, 0.25}));
  CHECK(vertex.size() == 4);
  CHECK(cells_of_box(g, make_box({0, 0}, {0, 0})).size() == 1);
}

TEST_CASE("cell set algebra") {
  auto g = grid2(4);
  const CellSet a(g, {5, 1, 3, 3});
  CHECK(a.indices() == std::vector<std::size_t>{1, 3, 5});
  const CellSet b(g, {3, 4});
  CHECK(a.unite(b).indices() == std::vector<std::size_t>{1, 3, 4, 5});
  CHECK(a.intersect(b).indices() == std::vector<std::size_t>{3});
  CHECK(a.difference(b).indices() == std::vector<std::size_t>{1, 5});
  CHECK(CellSet(g, {3}).subset_of(a));
  CHECK(CellSet::from_mask(g, a.mask()) == a);
  CHECK_THROWS(CellSet(g, {16}));
  CHECK_THROWS(a.unite(CellSet(grid2(8), {1})));
}

TEST_CASE("morphology") {
  auto g = grid2(8);
  const CellSet one(g, {g->flatten({3, 3})});
  CHECK(interior(one).empty());
  CHECK(boundary(one) == one);
  const auto b3 = block(g, 2, 4, 2, 4);
  CHECK(interior(b3).indices() == std::vector<std::size_t>{g->flatten({3, 3})});
  const auto full = CellSet::full(g);
  CHECK(interior(full) == block(g, 1, 6, 1, 6));
  CHECK(closure(b3) == b3);
}

TEST_CASE("property: boundary and interior partition S") {
  std::mt19937_64 rng(1);
  auto g = grid2(10);
  for (int t = 0; t < 50; ++t) {
    std::vector<char> mask(g->size());
    for (auto& m : mask) m = static_cast<char>(rng() % 3 != 0);
    const auto s = CellSet::from_mask(g, mask);
    const auto in = interior(s), bd = boundary(s);
    CHECK(in.unite(bd) == s);
    CHECK(in.intersect(bd).empty());
    CHECK(closure(s) == s);
  }
}

TEST_CASE("sample lattice") {
  const auto pts = sample_lattice(make_box({0, 0}, {1, 2}), 3);
  REQUIRE(pts.size() == 9);
  CHECK(pts.front() == make_point({0, 0}));
  CHECK(pts.back() == make_point({1, 2}));
  CHECK(pts[4] == make_point({0.5, 1}));
  const auto even = sample_lattice(make_box({0}, {1}), 2);
  REQUIRE(even.size() == 3);
  CHECK(even[2] == make_point({0.5}));
  CHECK(sample_lattice(make_box({0}, {1}), 1) == PointList{make_point({0.5})});
}

TEST_CASE("distance to a cell set") {
  auto g = grid2(4);
  const CellSet s(g, {0});
  CHECK(distance_to_set(make_point({0.1, 0.2}), s) == 0.0);
  CHECK(distance_to_set(make_point({0.75, 0.25}), s) == 0.5);
  CHECK(cells_containing(g, make_point({0.25, 0.25})).size() == 4);
  CHECK(cells_containing(g, make_point({2, 2})).empty());
}
