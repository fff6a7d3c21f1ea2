#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "ptopo/mesh/triangulation.hpp"

namespace ptopo {

using Coords = std::array<Id, 3>;

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simplex class: an ordered chain of k disjoint, nonempty axis masks
/// (bit 0 = x, bit 1 = y, bit 2 = z). The simplex anchored at `a` has the
/// vertices a, a+m1, a+m1+m2, ...
struct SimplexClass {
  int k = 0;
  std::array<int, 3> masks{};
  int union_mask = 0;
};

/// Freudenthal (Kuhn) triangulation of a regular vertex grid, described only
/// by its dimensions. Every query is computed on the fly.
///
/// Simplex ids: classes of one dimension are ordered lexicographically by
/// their mask tuple; id = (sizes of earlier classes) + row-major index of
/// the anchor inside the class's anchor box.
class GridModel {
 public:
  GridModel() = default;
  /// dims[2] == 1 selects the 2D triangulation.
  GridModel(Coords dims, bool periodic);

  int dimension() const { return dim_; }
  bool periodic() const { return periodic_; }
  const Coords& dims() const { return dims_; }

  Id vertex_count() const { return dims_[0] * dims_[1] * dims_[2]; }
  /// Wraps periodic coordinates; throws GridError when out of range otherwise.
  Id vertex_id(Coords c) const;
  Coords vertex_coords(Id id) const;
  bool contains(const Coords& c) const;
  Coords wrap(Coords c) const;

  int class_count(int k) const { return static_cast<int>(classes(k).size()); }
  const SimplexClass& simplex_class(int k, int c) const { return classes(k)[c]; }
  /// Index of the class with the given masks, or -1.
  int find_class(int k, const std::array<int, 3>& masks) const;
  Coords anchor_box(int k, int c) const;
  Id class_offset(int k, int c) const { return offsets_[k][c]; }

  Id simplex_count(int k) const;
  Id simplex_id(int k, int c, Coords anchor) const;
  /// Inverse of simplex_id.
  std::pair<int, Coords> decode(int k, Id id) const;
  /// Vertex coordinates along the chain (unwrapped for periodic grids).
  std::array<Coords, 4> chain(int k, int c, const Coords& anchor) const;
  SimplexVertices simplex_vertices(int k, Id id) const;
  /// Id of the simplex spanned by the vertices, or -1 if they do not form one.
  Id find_simplex(const SimplexVertices& s) const;

  /// Every k-simplex containing `v`, ascending.
  void vertex_star(Id v, int k, std::vector<Id>& out) const;
  /// Negative directions by descending mask, then positive ascending.
  void vertex_neighbors(Id v, std::vector<Id>& out) const;
  bool is_on_boundary(int k, Id id) const;

 private:
  const std::vector<SimplexClass>& classes(int k) const;

  int dim_ = 0;
  bool periodic_ = false;
  Coords dims_{1, 1, 1};
  std::array<std::vector<Id>, 4> offsets_;
};

/// Triangulation interface over a GridModel with geometry.
class ImplicitTriangulation final : public Triangulation {
 public:
  ImplicitTriangulation(GridModel model, Point origin, Point spacing)
      : model_(std::move(model)), origin_(origin), spacing_(spacing) {}

  const GridModel& model() const { return model_; }
  const Point& origin() const { return origin_; }
  const Point& spacing() const { return spacing_; }

  int dimension() const override { return model_.dimension(); }
  Id simplex_count(int dim) const override { return model_.simplex_count(dim); }
  SimplexVertices simplex_vertices(int dim, Id id) const override { return model_.simplex_vertices(dim, id); }
  Id find_simplex(const SimplexVertices& s) const override { return model_.find_simplex(s); }
  void vertex_star(Id v, int dim, std::vector<Id>& out) const override { model_.vertex_star(v, dim, out); }
  void vertex_neighbors(Id v, std::vector<Id>& out) const override { model_.vertex_neighbors(v, out); }
  Point vertex_point(Id v) const override;
  bool is_on_boundary(int dim, Id id) const override { return model_.is_on_boundary(dim, id); }
  using Triangulation::vertex_neighbors;
  using Triangulation::vertex_star;

 private:
  GridModel model_;
  Point origin_;
  Point spacing_;
};

/// Kuhn tetrahedra (or triangles) of a grid as explicit cells, in simplex-id
/// order of the grid model, with vertices in row-major order.
std::vector<std::vector<Id>> grid_cells(const GridModel& model);
std::vector<Point> grid_points(const GridModel& model, const Point& origin, const Point& spacing);

}  // namespace ptopo
