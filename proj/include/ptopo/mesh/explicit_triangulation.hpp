#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ptopo/mesh/triangulation.hpp"

namespace ptopo {

/// Traversal tables that can be requested before querying.
enum class Query : unsigned {
  Edges = 1u << 0,
  Triangles = 1u << 1,
  VertexStars = 1u << 2,
  VertexNeighbors = 1u << 3,
  Cofacets = 1u << 4,
  Boundary = 1u << 5,
};

class QuerySet {
 public:
  QuerySet() = default;
  QuerySet(std::initializer_list<Query> qs) {
    for (auto q : qs) bits_ |= static_cast<unsigned>(q);
  }
  static QuerySet all() {
    return {Query::Edges, Query::Triangles, Query::VertexStars, Query::VertexNeighbors, Query::Cofacets,
            Query::Boundary};
  }
  bool has(Query q) const { return bits_ & static_cast<unsigned>(q); }
  QuerySet& add(Query q) {
    bits_ |= static_cast<unsigned>(q);
    return *this;
  }

 private:
  unsigned bits_ = 0;
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simplicial mesh given by points and top-dimensional cells. Derived tables
/// are only built on request through precondition(); after that every query
/// is a table lookup.
class ExplicitTriangulation final : public Triangulation {
 public:
  /// Cells must all have the same number of vertices (2, 3 or 4). `dim`
  /// gives the dimension of a mesh without cells.
  static ExplicitTriangulation build(std::vector<Point> points, const std::vector<std::vector<Id>>& cells,
                                     int dim = 0);

  /// Builds the requested tables (and what they depend on). Tables already
  /// present are left alone.
  void precondition(QuerySet queries);
  bool is_preconditioned(Query q) const;
  /// Number of tables built so far (each table counts once).
  int tables_built() const { return tables_built_; }
  /// Builds per table: edges, triangles, tetrahedra, vertex_stars,
  /// vertex_neighbors, cofacets, boundary.
  const std::map<std::string, int>& table_builds() const { return table_builds_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  int dimension() const override { return dim_; }
  Id simplex_count(int dim) const override;
  SimplexVertices simplex_vertices(int dim, Id id) const override;
  Id find_simplex(const SimplexVertices& s) const override;
  void vertex_star(Id v, int dim, std::vector<Id>& out) const override;
  void vertex_neighbors(Id v, std::vector<Id>& out) const override;
  Point vertex_point(Id v) const override { return points_.at(static_cast<std::size_t>(v)); }
  bool is_on_boundary(int dim, Id id) const override;
  std::vector<Id> cofaces(int dim, Id id, int coface_dim) const override;

  /// Number of (dim+1)-simplices having the simplex as a facet.
  int cofacet_count(int dim, Id id) const;

  const std::vector<Point>& points() const { return points_; }
  using Triangulation::vertex_neighbors;
  using Triangulation::vertex_star;

 private:
  ExplicitTriangulation() = default;

  struct Csr {
    std::vector<Id> offsets;
    std::vector<Id> values;
    std::size_t size(Id i) const { return static_cast<std::size_t>(offsets[i + 1] - offsets[i]); }
  };

  void build_table(int k);
  void require(bool ok, const char* what) const;
  void check_id(int dim, Id id) const;

  int dim_ = 0;
  std::vector<Point> points_;
  // simplices_[k] for 1 <= k <= dim_; simplices_[dim_] are the cells.
  std::array<std::vector<SimplexVertices>, kMaxDimension + 1> simplices_;
  std::array<bool, kMaxDimension + 1> has_table_{};
  std::array<std::unordered_map<SimplexVertices, Id, SimplexVerticesHash>, kMaxDimension + 1> lookup_;
  std::array<Csr, kMaxDimension + 1> star_;
  bool has_stars_ = false;
  Csr neighbors_;
  bool has_neighbors_ = false;
  std::array<Csr, kMaxDimension + 1> cofacets_;
  bool has_cofacets_ = false;
  std::array<std::vector<char>, kMaxDimension + 1> boundary_;
  bool has_boundary_ = false;
  int tables_built_ = 0;
  std::map<std::string, int> table_builds_;
  std::vector<std::string> warnings_;
};

}  // namespace ptopo
