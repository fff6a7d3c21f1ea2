#include <algorithm>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "ptopo/grid/freudenthal.hpp"
#include "ptopo/grid/grid_io.hpp"
#include "ptopo/mesh/explicit_triangulation.hpp"

using namespace ptopo;

TEST_CASE("vertex ids are row-major and wrap when periodic") {
  GridModel g({4, 3, 2}, false);
  CHECK(g.dimension() == 3);
  CHECK(g.vertex_id({1, 2, 1}) == 21);
  CHECK(g.vertex_coords(21) == Coords{1, 2, 1});
  CHECK_THROWS_AS(g.vertex_id({4, 0, 0}), GridError);
  GridModel p({4, 3, 3}, true);
  CHECK(p.vertex_id({-1, 0, 0}) == 3);
  CHECK(p.vertex_id({4, 3, -3}) == 0);
  CHECK_THROWS_AS(GridModel({4, 2, 3}, true), GridError);
  CHECK(GridModel({5, 4, 1}, false).dimension() == 2);
}

TEST_CASE("simplex counts") {
  GridModel cube({2, 2, 2}, false);
  CHECK(cube.simplex_count(0) == 8);
  CHECK(cube.simplex_count(1) == 19);
  CHECK(cube.simplex_count(2) == 18);
  CHECK(cube.simplex_count(3) == 6);
  GridModel sq({3, 3, 1}, false);
  CHECK(sq.simplex_count(1) == 16);
  CHECK(sq.simplex_count(2) == 8);
  GridModel torus({3, 4, 5}, true);
  const Id v = 60;
  CHECK(torus.simplex_count(1) == 7 * v);
  CHECK(torus.simplex_count(2) == 12 * v);
  CHECK(torus.simplex_count(3) == 6 * v);
}

TEST_CASE("class offsets follow lexicographic class order") {
  GridModel g({4, 3, 2}, false);
  REQUIRE(g.class_count(1) == 7);
  CHECK(g.simplex_class(1, 0).masks[0] == 1);
  CHECK(g.anchor_box(1, 0) == Coords{3, 3, 2});
  CHECK(g.class_offset(1, 1) == 18);
  CHECK(g.simplex_vertices(1, 18) == SimplexVertices::from({0, 4}));
  CHECK(g.class_count(3) == 6);
  CHECK(g.class_count(2) == 12);
}

TEST_CASE("ids round-trip through decode and find_simplex") {
  for (bool periodic : {false, true}) {
    GridModel g({3, 4, 3}, periodic);
    for (int k = 0; k <= 3; ++k)
      for (Id id = 0; id < g.simplex_count(k); ++id) {
        auto [c, a] = g.decode(k, id);
        CHECK(g.simplex_id(k, c, a) == id);
        CHECK(g.find_simplex(g.simplex_vertices(k, id)) == id);
      }
  }
}

TEST_CASE("vertex neighbor counts and order") {
  GridModel g({4, 4, 4}, false);
  std::vector<Id> nb;
  g.vertex_neighbors(g.vertex_id({1, 1, 1}), nb);
  CHECK(nb.size() == 14);
  g.vertex_neighbors(0, nb);
  CHECK(nb.size() == 7);
  CHECK(nb.front() == g.vertex_id({1, 0, 0}));
  g.vertex_neighbors(g.vertex_id({3, 3, 3}), nb);
  CHECK(nb.size() == 7);
  CHECK(nb.front() == g.vertex_id({2, 2, 2}));
  GridModel sq({4, 4, 1}, false);
  sq.vertex_neighbors(sq.vertex_id({1, 1, 0}), nb);
  CHECK(nb.size() == 6);
  GridModel t({3, 3, 3}, true);
  t.vertex_neighbors(0, nb);
  CHECK(nb.size() == 14);
}

TEST_CASE("grid boundary flags") {
  GridModel g({3, 3, 3}, false);
  CHECK(g.is_on_boundary(0, 0));
  CHECK_FALSE(g.is_on_boundary(0, g.vertex_id({1, 1, 1})));
  Id diag = g.find_simplex(SimplexVertices::from({0, g.vertex_id({1, 1, 1})}));
  REQUIRE(diag >= 0);
  CHECK_FALSE(g.is_on_boundary(1, diag));
  Id face_edge = g.find_simplex(SimplexVertices::from({0, 1}));
  CHECK(g.is_on_boundary(1, face_edge));
  // Both endpoints on the boundary, but not on a common face.
  Id crossing = g.find_simplex(SimplexVertices::from({g.vertex_id({1, 0, 1}), g.vertex_id({2, 1, 2})}));
  REQUIRE(crossing >= 0);
  CHECK_FALSE(g.is_on_boundary(1, crossing));
  GridModel t({3, 3, 3}, true);
  for (int k = 0; k <= 3; ++k)
    for (Id i = 0; i < t.simplex_count(k); ++i) CHECK_FALSE(t.is_on_boundary(k, i));
}

namespace {

void check_equivalent(const GridModel& g) {
  auto cells = grid_cells(g);
  auto pts = grid_points(g, {0.5, -1, 2}, {1, 2, 0.5});
  auto ex = ExplicitTriangulation::build(pts, cells);
  ex.precondition(QuerySet::all());
  ImplicitTriangulation im(g, {0.5, -1, 2}, {1, 2, 0.5});
  REQUIRE(ex.dimension() == im.dimension());
  for (Id v = 0; v < g.vertex_count(); ++v) CHECK(ex.vertex_point(v) == im.vertex_point(v));
  for (int k = 0; k <= g.dimension(); ++k) {
    REQUIRE(ex.simplex_count(k) == im.simplex_count(k));
    for (Id i = 0; i < ex.simplex_count(k); ++i) {
      Id j = im.find_simplex(ex.simplex_vertices(k, i));
      REQUIRE(j >= 0);
      CHECK(ex.is_on_boundary(k, i) == im.is_on_boundary(k, j));
    }
  }
  for (Id v = 0; v < g.vertex_count(); ++v) {
    for (int k = 1; k <= g.dimension(); ++k) {
      std::set<SimplexVertices> a, b;
      for (Id s : ex.vertex_star(v, k)) a.insert(ex.simplex_vertices(k, s));
      auto star = im.vertex_star(v, k);
      CHECK(std::is_sorted(star.begin(), star.end()));
      for (Id s : star) b.insert(im.simplex_vertices(k, s));
      CHECK(a == b);
    }
    auto na = ex.vertex_neighbors(v);
    auto nb = im.vertex_neighbors(v);
    CHECK(std::set<Id>(na.begin(), na.end()) == std::set<Id>(nb.begin(), nb.end()));
    CHECK(na.size() == nb.size());
  }
}

}  // namespace

TEST_CASE("implicit and explicit triangulations agree") {
  for (Coords d : {Coords{2, 2, 2}, Coords{4, 3, 2}, Coords{3, 5, 1}, Coords{5, 4, 3}}) check_equivalent(GridModel(d, false));
  for (Coords d : {Coords{3, 3, 3}, Coords{4, 3, 5}, Coords{3, 4, 1}}) check_equivalent(GridModel(d, true));
}

TEST_CASE("grid files round-trip") {
  auto dir = std::filesystem::temp_directory_path() / "ptopo_grid_io";
  std::filesystem::create_directories(dir);
  GridData g;
  g.dims = {3, 2, 2};
  g.origin = {1, 2, 3};
  g.spacing = {0.5, 0.25, 2};
  g.fields["f"] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11.5};
  write_grid((dir / "g.hdr").string(), g);
  auto back = read_grid((dir / "g.hdr").string());
  CHECK(back.dims == g.dims);
  CHECK(back.origin == g.origin);
  CHECK(back.spacing == g.spacing);
  CHECK(back.fields == g.fields);
  CHECK(back.model().vertex_count() == 12);
  std::filesystem::remove_all(dir);
}
