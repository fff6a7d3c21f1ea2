#include "ptopo/mesh/explicit_triangulation.hpp"

#include <algorithm>
#include <sstream>

namespace ptopo {

SimplexVertices SimplexVertices::from(std::initializer_list<Id> ids) {
  return from_range(ids.begin(), static_cast<int>(ids.size()));
}

SimplexVertices SimplexVertices::from_range(const Id* first, int count) {
  SimplexVertices s;
  s.dim = count - 1;
  std::copy(first, first + count, s.v.begin());
  std::sort(s.v.begin(), s.v.begin() + count);
  return s;
}

void for_each_face(const SimplexVertices& s, int face_dim, const std::function<void(const SimplexVertices&)>& fn) {
  const int n = s.size();
  const int k = face_dim + 1;
  if (k > n || k < 1) return;
  std::array<int, 4> idx{};
  for (int i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    SimplexVertices f;
    f.dim = face_dim;
    for (int i = 0; i < k; ++i) f.v[i] = s.v[idx[i]];
    fn(f);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::vector<Id> Triangulation::faces(int dim, Id id, int face_dim) const {
  std::vector<Id> out;
  if (face_dim >= dim || face_dim < 0) return out;
  auto s = simplex_vertices(dim, id);
  for_each_face(s, face_dim, [&](const SimplexVertices& f) {
    out.push_back(face_dim == 0 ? f.v[0] : find_simplex(f));
  });
  return out;
}

std::vector<Id> Triangulation::cofaces(int dim, Id id, int coface_dim) const {
  std::vector<Id> out;
  if (coface_dim <= dim || coface_dim > dimension()) return out;
  auto s = simplex_vertices(dim, id);
  std::vector<Id> star;
  vertex_star(s.v[0], coface_dim, star);
  for (Id c : star) {
    auto cs = simplex_vertices(coface_dim, c);
    bool all = true;
    for (int i = 0; i <= dim && all; ++i) all = cs.contains(s.v[i]);
    if (all) out.push_back(c);
  }
  return out;
}

VertexLink Triangulation::vertex_link(Id v) const {
  VertexLink link;
  std::vector<SimplexVertices> seen;
  for (int k = 1; k <= dimension(); ++k) {
    std::vector<Id> star;
    vertex_star(v, k, star);
    auto& bucket = link.by_dim[k - 1];
    for (Id c : star) {
      auto s = simplex_vertices(k, c);
      SimplexVertices opp;
      opp.dim = k - 1;
      int j = 0;
      for (int i = 0; i <= k; ++i)
        if (s.v[i] != v) opp.v[j++] = s.v[i];
      bucket.push_back(opp);
    }
    std::sort(bucket.begin(), bucket.end());
    bucket.erase(std::unique(bucket.begin(), bucket.end()), bucket.end());
  }
  return link;
}

ExplicitTriangulation ExplicitTriangulation::build(std::vector<Point> points,
                                                   const std::vector<std::vector<Id>>& cells, int dim) {
  ExplicitTriangulation t;
  t.points_ = std::move(points);
  if (cells.empty()) {
    t.dim_ = dim;
    t.has_table_.fill(true);
    return t;
  }
  const auto nv = static_cast<Id>(t.points_.size());
  const int size = static_cast<int>(cells.front().size());
  if (size < 2 || size > 4) throw MeshError("cells must have 2, 3 or 4 vertices");
  if (dim != 0 && dim != size - 1) throw MeshError("cell size does not match the mesh dimension");
  t.dim_ = size - 1;
  auto& top = t.simplices_[t.dim_];
  top.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    if (static_cast<int>(cell.size()) != size) {
      std::ostringstream os;
      os << "cell " << c << " has " << cell.size() << " vertices, expected " << size << " (uniform top dimension)";
      throw MeshError(os.str());
    }
    for (Id v : cell) {
      if (v < 0 || v >= nv) {
        std::ostringstream os;
        os << "cell " << c << " references vertex " << v << " outside [0, " << nv << ")";
        throw MeshError(os.str());
      }
    }
    auto s = SimplexVertices::from_range(cell.data(), size);
    for (int i = 1; i < size; ++i) {
      if (s.v[i] == s.v[i - 1]) {
        std::ostringstream os;
        os << "cell " << c << " repeats vertex " << s.v[i];
        throw MeshError(os.str());
      }
    }
    top.push_back(s);
  }
  t.has_table_[0] = true;
  t.has_table_[t.dim_] = true;
  for (Id c = 0; c < static_cast<Id>(top.size()); ++c) t.lookup_[t.dim_].emplace(top[c], c);
  return t;
}

bool ExplicitTriangulation::is_preconditioned(Query q) const {
  switch (q) {
    case Query::Edges: return has_table_[std::min(1, dim_)];
    case Query::Triangles: return dim_ < 2 || has_table_[2];
    case Query::VertexStars: return has_stars_;
    case Query::VertexNeighbors: return has_neighbors_;
    case Query::Cofacets: return has_cofacets_;
    case Query::Boundary: return has_boundary_;
  }
  return false;
}

namespace {
const char* const kTableNames[] = {"vertices", "edges", "triangles", "tetrahedra"};
}  // namespace

void ExplicitTriangulation::build_table(int k) {
  if (k <= 0 || k > dim_ || has_table_[k]) return;
  auto& out = simplices_[k];
  auto& map = lookup_[k];
  for (const auto& cell : simplices_[dim_]) {
    for_each_face(cell, k, [&](const SimplexVertices& f) {
      if (map.emplace(f, static_cast<Id>(out.size())).second) out.push_back(f);
    });
  }
  has_table_[k] = true;
  ++tables_built_;
  ++table_builds_[kTableNames[k]];
}

void ExplicitTriangulation::precondition(QuerySet q) {
  const bool want_boundary = q.has(Query::Boundary);
  const bool want_cofacets = q.has(Query::Cofacets) || want_boundary;
  const bool want_stars = q.has(Query::VertexStars);
  const bool want_neighbors = q.has(Query::VertexNeighbors);
  if (q.has(Query::Edges) || want_neighbors) build_table(1);
  if (q.has(Query::Triangles)) build_table(2);
  if (want_stars || want_cofacets)
    for (int k = 1; k <= dim_; ++k) build_table(k);

  const Id nv = static_cast<Id>(points_.size());
  if (want_stars && !has_stars_) {
    for (int k = 1; k <= dim_; ++k) {
      auto& csr = star_[k];
      csr.offsets.assign(nv + 1, 0);
      for (const auto& s : simplices_[k])
        for (int i = 0; i <= k; ++i) ++csr.offsets[s.v[i] + 1];
      for (Id i = 0; i < nv; ++i) csr.offsets[i + 1] += csr.offsets[i];
      csr.values.resize(csr.offsets[nv]);
      std::vector<Id> fill(csr.offsets.begin(), csr.offsets.end() - 1);
      for (Id c = 0; c < static_cast<Id>(simplices_[k].size()); ++c) {
        const auto& s = simplices_[k][c];
        for (int i = 0; i <= k; ++i) csr.values[fill[s.v[i]]++] = c;
      }
    }
    has_stars_ = true;
    ++tables_built_;
    ++table_builds_["vertex_stars"];
  }
  if (want_neighbors && !has_neighbors_) {
    std::vector<std::vector<Id>> adj(nv);
    if (dim_ >= 1)
      for (const auto& e : simplices_[1]) {
        adj[e.v[0]].push_back(e.v[1]);
        adj[e.v[1]].push_back(e.v[0]);
      }
    neighbors_.offsets.assign(nv + 1, 0);
    for (Id i = 0; i < nv; ++i) {
      std::sort(adj[i].begin(), adj[i].end());
      neighbors_.offsets[i + 1] = neighbors_.offsets[i] + static_cast<Id>(adj[i].size());
    }
    neighbors_.values.reserve(neighbors_.offsets[nv]);
    for (auto& a : adj) neighbors_.values.insert(neighbors_.values.end(), a.begin(), a.end());
    has_neighbors_ = true;
    ++tables_built_;
    ++table_builds_["vertex_neighbors"];
  }
  if (want_cofacets && !has_cofacets_) {
    for (int k = 0; k < dim_; ++k) {
      auto& csr = cofacets_[k];
      const Id n = k == 0 ? nv : static_cast<Id>(simplices_[k].size());
      std::vector<std::vector<Id>> lists(n);
      for (Id c = 0; c < static_cast<Id>(simplices_[k + 1].size()); ++c) {
        for_each_face(simplices_[k + 1][c], k, [&](const SimplexVertices& f) {
          Id fid = k == 0 ? f.v[0] : lookup_[k].at(f);
          lists[fid].push_back(c);
        });
      }
      csr.offsets.assign(n + 1, 0);
      for (Id i = 0; i < n; ++i) csr.offsets[i + 1] = csr.offsets[i] + static_cast<Id>(lists[i].size());
      csr.values.clear();
      for (auto& l : lists) csr.values.insert(csr.values.end(), l.begin(), l.end());
    }
    has_cofacets_ = true;
    ++tables_built_;
    ++table_builds_["cofacets"];
  }
  if (want_boundary && !has_boundary_) {
    for (int k = 0; k <= dim_; ++k) boundary_[k].assign(static_cast<std::size_t>(simplex_count(k)), 0);
    if (dim_ >= 1) {
      const int f = dim_ - 1;
      const Id nf = simplex_count(f);
      for (Id i = 0; i < nf; ++i) {
        auto n = cofacets_[f].size(i);
        if (n > 2) {
          std::ostringstream os;
          os << "non-manifold " << f << "-simplex " << i << " has " << n << " cofacets; treated as interior";
          warnings_.push_back(os.str());
        }
        if (n != 1) continue;
        boundary_[f][i] = 1;
        auto s = simplex_vertices(f, i);
        for (int k = 0; k < f; ++k)
          for_each_face(s, k, [&](const SimplexVertices& g) {
            Id gid = k == 0 ? g.v[0] : lookup_[k].at(g);
            boundary_[k][gid] = 1;
          });
      }
      // A top cell is reported as boundary when one of its facets is.
      for (Id c = 0; c < simplex_count(dim_); ++c) {
        for_each_face(simplices_[dim_][c], f, [&](const SimplexVertices& g) {
          Id gid = f == 0 ? g.v[0] : lookup_[f].at(g);
          if (boundary_[f][gid]) boundary_[dim_][c] = 1;
        });
      }
    }
    has_boundary_ = true;
    ++tables_built_;
    ++table_builds_["boundary"];
  }
}

void ExplicitTriangulation::require(bool ok, const char* what) const {
  if (!ok) throw PreconditionError(std::string("query requires precondition(") + what + ")");
}

void ExplicitTriangulation::check_id(int dim, Id id) const {
  if (dim < 0 || dim > dim_) throw std::out_of_range("simplex dimension out of range");
  if (id < 0 || id >= simplex_count(dim)) {
    std::ostringstream os;
    os << "invalid " << dim << "-simplex id " << id;
    throw std::out_of_range(os.str());
  }
}

Id ExplicitTriangulation::simplex_count(int dim) const {
  if (dim == 0) return static_cast<Id>(points_.size());
  if (dim < 0 || dim > dim_) return 0;
  require(has_table_[dim], dim == 1 ? "Edges" : dim == 2 ? "Triangles" : "Cofacets");
  return static_cast<Id>(simplices_[dim].size());
}

SimplexVertices ExplicitTriangulation::simplex_vertices(int dim, Id id) const {
  check_id(dim, id);
  if (dim == 0) {
    SimplexVertices s;
    s.v[0] = id;
    return s;
  }
  return simplices_[dim][id];
}

Id ExplicitTriangulation::find_simplex(const SimplexVertices& s) const {
  if (s.dim == 0) return s.v[0] >= 0 && s.v[0] < static_cast<Id>(points_.size()) ? s.v[0] : -1;
  if (s.dim > dim_) return -1;
  require(has_table_[s.dim], s.dim == 1 ? "Edges" : s.dim == 2 ? "Triangles" : "Cofacets");
  auto it = lookup_[s.dim].find(s);
  return it == lookup_[s.dim].end() ? -1 : it->second;
}

void ExplicitTriangulation::vertex_star(Id v, int dim, std::vector<Id>& out) const {
  require(has_stars_, "VertexStars");
  check_id(0, v);
  out.clear();
  if (dim < 1 || dim > dim_) return;
  const auto& csr = star_[dim];
  out.assign(csr.values.begin() + csr.offsets[v], csr.values.begin() + csr.offsets[v + 1]);
}

void ExplicitTriangulation::vertex_neighbors(Id v, std::vector<Id>& out) const {
  require(has_neighbors_, "VertexNeighbors");
  check_id(0, v);
  out.assign(neighbors_.values.begin() + neighbors_.offsets[v], neighbors_.values.begin() + neighbors_.offsets[v + 1]);
}

bool ExplicitTriangulation::is_on_boundary(int dim, Id id) const {
  require(has_boundary_, "Boundary");
  check_id(dim, id);
  return boundary_[dim][id] != 0;
}

int ExplicitTriangulation::cofacet_count(int dim, Id id) const {
  require(has_cofacets_, "Cofacets");
  check_id(dim, id);
  if (dim >= dim_) return 0;
  return static_cast<int>(cofacets_[dim].size(id));
}

std::vector<Id> ExplicitTriangulation::cofaces(int dim, Id id, int coface_dim) const {
  if (coface_dim == dim + 1 && has_cofacets_) {
    check_id(dim, id);
    if (dim >= dim_) return {};
    const auto& csr = cofacets_[dim];
    return {csr.values.begin() + csr.offsets[id], csr.values.begin() + csr.offsets[id + 1]};
  }
  return Triangulation::cofaces(dim, id, coface_dim);
}

}  // namespace ptopo
