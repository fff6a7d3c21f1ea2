#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace ptopo {

using Id = std::int64_t;
using Point = std::array<double, 3>;

constexpr int kMaxDimension = 3;

/// Vertex ids of a simplex in ascending order; unused slots hold -1.
struct SimplexVertices {
  std::array<Id, 4> v{-1, -1, -1, -1};
  int dim = 0;

  int size() const { return dim + 1; }
  const Id* begin() const { return v.data(); }
  const Id* end() const { return v.data() + size(); }
  Id operator[](int i) const { return v[i]; }
  bool contains(Id x) const {
    for (int i = 0; i <= dim; ++i)
      if (v[i] == x) return true;
    return false;
  }
  bool operator==(const SimplexVertices& o) const { return dim == o.dim && v == o.v; }
  bool operator<(const SimplexVertices& o) const { return dim != o.dim ? dim < o.dim : v < o.v; }

  /// Builds a sorted simplex from an unsorted list of vertices.
  static SimplexVertices from(std::initializer_list<Id> ids);
  static SimplexVertices from_range(const Id* first, int count);
};

struct SimplexVerticesHash {
  std::size_t operator()(const SimplexVertices& s) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(s.dim + 1);
    for (int i = 0; i <= s.dim; ++i) {
      h ^= static_cast<std::uint64_t>(s.v[i]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

/// Raised when a query needs a table that was not preconditioned.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Link of a vertex, grouped by simplex dimension (index 0 = link vertices).
struct VertexLink {
  std::array<std::vector<SimplexVertices>, kMaxDimension> by_dim;
};

/// Read-only traversal interface shared by explicit meshes and implicit grids.
/// All ids are local to the triangulation.
class Triangulation {
 public:
  virtual ~Triangulation() = default;

  virtual int dimension() const = 0;
  virtual Id simplex_count(int dim) const = 0;
  Id vertex_count() const { return simplex_count(0); }

  virtual SimplexVertices simplex_vertices(int dim, Id id) const = 0;
  /// Id of the simplex spanned by the (sorted) vertices, or -1.
  virtual Id find_simplex(const SimplexVertices& s) const = 0;

  /// Every `dim`-simplex that has `v` as a vertex.
  virtual void vertex_star(Id v, int dim, std::vector<Id>& out) const = 0;
  virtual void vertex_neighbors(Id v, std::vector<Id>& out) const = 0;
  virtual Point vertex_point(Id v) const = 0;

  /// Boundary of this triangulation (not of a larger domain it may belong to).
  virtual bool is_on_boundary(int dim, Id id) const = 0;

  std::vector<Id> faces(int dim, Id id, int face_dim) const;
  virtual std::vector<Id> cofaces(int dim, Id id, int coface_dim) const;
  VertexLink vertex_link(Id v) const;
  std::vector<Id> vertex_neighbors(Id v) const {
    std::vector<Id> out;
    vertex_neighbors(v, out);
    return out;
  }
  std::vector<Id> vertex_star(Id v, int dim) const {
    std::vector<Id> out;
    vertex_star(v, dim, out);
    return out;
  }
};

/// Calls `fn` with every `k`-vertex subset of `s` (as a sorted simplex), in
/// lexicographic order.
void for_each_face(const SimplexVertices& s, int face_dim, const std::function<void(const SimplexVertices&)>& fn);

}  // namespace ptopo
