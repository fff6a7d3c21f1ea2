#include "ptopo/algo/critical_points.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace ptopo::algo {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<std::vector<Id>> components(const dist::GhostedBlock& block, const std::vector<Id>& verts,
                                        const std::vector<std::vector<int>>& cells) {
  UnionFind uf(verts.size());
  for (auto& c : cells)
    for (std::size_t i = 1; i < c.size(); ++i) uf.unite(c[0], c[i]);
  std::vector<std::vector<Id>> out;
  std::vector<int> slot(verts.size(), -1);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    int root = uf.find(static_cast<int>(i));
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[slot[root]].push_back(verts[i]);
  }
  auto min_gid = [&](const std::vector<Id>& comp) {
    Id m = block.global_id(0, comp[0]);
    for (Id u : comp) m = std::min(m, block.global_id(0, u));
    return m;
  };
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return min_gid(a) < min_gid(b); });
  return out;
}

}  // namespace

LinkSplit split_link(const dist::GhostedBlock& block, const OrderField& order, Id v) {
  const auto& tri = block.triangulation();
  const int d = tri.dimension();
  std::vector<Id> star;
  tri.vertex_star(v, d, star);
  std::vector<Id> lower, upper;
  std::vector<SimplexVertices> cells;
  cells.reserve(star.size());
  for (Id c : star) {
    cells.push_back(tri.simplex_vertices(d, c));
    for (Id u : cells.back())
      if (u != v) (order.less(u, v) ? lower : upper).push_back(u);
  }
  for (auto* side : {&lower, &upper}) {
    std::sort(side->begin(), side->end());
    side->erase(std::unique(side->begin(), side->end()), side->end());
  }
  // Link simplices of each side, as sorted local vertex tuples.
  std::set<std::vector<Id>> lower_faces, upper_faces;
  for (auto& cs : cells) {
    std::vector<Id> lo, up;
    for (Id u : cs)
      if (u != v) (order.less(u, v) ? lo : up).push_back(u);
    for (auto* side : {&lo, &up}) {
      auto& faces = side == &lo ? lower_faces : upper_faces;
      const int n = static_cast<int>(side->size());
      for (int mask = 1; mask < (1 << n); ++mask) {
        std::vector<Id> f;
        for (int i = 0; i < n; ++i)
          if (mask & (1 << i)) f.push_back((*side)[i]);
        faces.insert(f);
      }
    }
  }
  auto euler = [](const std::set<std::vector<Id>>& faces) {
    Id chi = 0;
    for (auto& f : faces) chi += f.size() % 2 ? 1 : -1;
    return chi;
  };
  std::vector<std::vector<int>> lower_cells, upper_cells;
  for (auto& cs : cells) {
    std::vector<int> lo, up;
    for (Id u : cs) {
      if (u == v) continue;
      if (order.less(u, v))
        lo.push_back(static_cast<int>(std::lower_bound(lower.begin(), lower.end(), u) - lower.begin()));
      else
        up.push_back(static_cast<int>(std::lower_bound(upper.begin(), upper.end(), u) - upper.begin()));
    }
    if (lo.size() > 1) lower_cells.push_back(std::move(lo));
    if (up.size() > 1) upper_cells.push_back(std::move(up));
  }
  return {components(block, lower, lower_cells), components(block, upper, upper_cells), euler(lower_faces),
          euler(upper_faces)};
}

int classify_link(int dim, std::size_t lower, std::size_t upper, Id lower_euler, Id upper_euler, bool& degenerate) {
  degenerate = false;
  if (lower == 0) return 0;
  if (upper == 0) return dim;
  const auto c_lo = static_cast<Id>(lower);
  const auto c_up = static_cast<Id>(upper);
  if (dim <= 2) {
    if (c_lo == 1 && c_up == 1) return -1;
    degenerate = c_lo > 2 || c_up > 2;
    return 1;
  }
  // Extra components on one side, or loops on the other, make a saddle.
  const Id n1 = std::max(c_lo - 1, c_up - upper_euler);
  const Id n2 = std::max(c_up - 1, c_lo - lower_euler);
  if (n1 == 0 && n2 == 0) return -1;
  degenerate = c_lo > 2 || c_up > 2 || (n1 > 0 && n2 > 0);
  return n1 > 0 ? 1 : 2;
}

std::vector<CriticalPoint> classify_critical_points(dist::GhostedBlock& block, const OrderField& order) {
  if (static_cast<Id>(order.size()) != block.local_count(0))
    throw AlgorithmError("critical points: order does not match the block");
  block.require_boundary();
  const int d = block.dimension();
  std::vector<CriticalPoint> out;
  for (Id v = 0; v < block.local_count(0); ++v) {
    if (block.is_ghost(0, v)) continue;
    auto link = split_link(block, order, v);
    bool degenerate = false;
    int index = classify_link(d, link.lower.size(), link.upper.size(), link.lower_euler, link.upper_euler, degenerate);
    if (index < 0) continue;
    out.push_back({block.global_id(0, v), index, degenerate, block.is_global_boundary(0, v), block.position(v),
                   block.rank()});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.gid < b.gid; });
  return out;
}

}  // namespace ptopo::algo
