#include "ptopo/algo/discrete_gradient.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace ptopo::algo {

namespace {

struct Cell {
  int dim;
  Id local;
  SimplexVertices verts;
  /// Orders of the vertices, descending, padded with -1.
  std::array<Id, 4> key;
  std::vector<int> faces;    // indices of facets that contain v
  std::vector<int> cofaces;  // indices of cofacets in the lower star
  bool done = false;         // paired or critical
};

struct KeyLess {
  const std::vector<Cell>* cells;
  bool operator()(int a, int b) const {
    const auto& ka = (*cells)[a].key;
    const auto& kb = (*cells)[b].key;
    return ka != kb ? ka < kb : a < b;
  }
};

/// Lower star of v: v plus every simplex whose other vertices are all lower.
std::vector<Cell> lower_star(const Triangulation& tri, const OrderField& order, Id v) {
  std::vector<Cell> cells;
  Cell self{0, v, SimplexVertices::from({v}), {order[v], -1, -1, -1}, {}, {}};
  cells.push_back(self);
  std::vector<Id> star;
  for (int k = 1; k <= tri.dimension(); ++k) {
    tri.vertex_star(v, k, star);
    for (Id s : star) {
      auto sv = tri.simplex_vertices(k, s);
      bool lower = true;
      for (Id u : sv)
        if (u != v && !order.less(u, v)) lower = false;
      if (!lower) continue;
      Cell c{k, s, sv, {-1, -1, -1, -1}, {}, {}};
      for (int i = 0; i <= k; ++i) c.key[i] = order[sv.v[i]];
      std::sort(c.key.begin(), c.key.begin() + k + 1, std::greater<>());
      cells.push_back(std::move(c));
    }
  }
  for (std::size_t a = 0; a < cells.size(); ++a)
    for (std::size_t b = 0; b < cells.size(); ++b) {
      if (cells[b].dim != cells[a].dim + 1) continue;
      bool inside = true;
      for (Id u : cells[a].verts) inside = inside && cells[b].verts.contains(u);
      if (!inside) continue;
      cells[a].cofaces.push_back(static_cast<int>(b));
      cells[b].faces.push_back(static_cast<int>(a));
    }
  return cells;
}

int unpaired_faces(const std::vector<Cell>& cells, int c, int* last) {
  int n = 0;
  for (int f : cells[c].faces)
    if (!cells[f].done) {
      ++n;
      if (last) *last = f;
    }
  return n;
}

}  // namespace

std::array<Id, 4> DiscreteGradient::critical_counts() const {
  std::array<Id, 4> out{};
  for (auto& c : critical) ++out[c.dim];
  return out;
}

DiscreteGradient compute_discrete_gradient(dist::GhostedBlock& block, const OrderField& order) {
  if (static_cast<Id>(order.size()) != block.local_count(0))
    throw AlgorithmError("discrete gradient: order does not match the block");
  const auto& tri = block.triangulation();
  for (int k = 1; k < block.dimension(); ++k) block.require_ids(k);
  DiscreteGradient out;
  auto emit_pair = [&](const Cell& a, const Cell& b) {
    out.pairs.push_back({a.dim, block.global_id(a.dim, a.local), block.global_id(b.dim, b.local),
                         block.global_vertices(a.dim, a.local), block.global_vertices(b.dim, b.local)});
  };
  auto emit_critical = [&](const Cell& a) {
    out.critical.push_back({a.dim, block.global_id(a.dim, a.local), block.global_vertices(a.dim, a.local)});
  };

  for (Id v = 0; v < block.local_count(0); ++v) {
    if (block.is_ghost(0, v)) continue;
    auto cells = lower_star(tri, order, v);
    if (cells.size() == 1) {
      cells[0].done = true;
      emit_critical(cells[0]);
      continue;
    }
    KeyLess less{&cells};
    std::set<int, KeyLess> pq_zero(less), pq_one(less);
    int delta = -1;
    for (int c = 1; c < static_cast<int>(cells.size()); ++c)
      if (cells[c].dim == 1 && (delta < 0 || less(c, delta))) delta = c;
    cells[0].done = cells[delta].done = true;
    emit_pair(cells[0], cells[delta]);
    for (int c = 1; c < static_cast<int>(cells.size()); ++c)
      if (cells[c].dim == 1 && c != delta) pq_zero.insert(c);
    auto push_cofaces = [&](int c) {
      for (int cf : cells[c].cofaces)
        if (!cells[cf].done && unpaired_faces(cells, cf, nullptr) == 1) pq_one.insert(cf);
    };
    push_cofaces(delta);
    while (!pq_one.empty() || !pq_zero.empty()) {
      while (!pq_one.empty()) {
        int alpha = *pq_one.begin();
        pq_one.erase(pq_one.begin());
        if (cells[alpha].done) continue;
        int face = -1;
        if (unpaired_faces(cells, alpha, &face) == 0) {
          pq_zero.insert(alpha);
          continue;
        }
        cells[alpha].done = cells[face].done = true;
        emit_pair(cells[face], cells[alpha]);
        pq_zero.erase(face);
        push_cofaces(alpha);
        push_cofaces(face);
      }
      if (!pq_zero.empty()) {
        int gamma = *pq_zero.begin();
        pq_zero.erase(pq_zero.begin());
        if (cells[gamma].done) continue;
        cells[gamma].done = true;
        emit_critical(cells[gamma]);
        push_cofaces(gamma);
      }
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const auto& a, const auto& b) { return std::tie(a.dim, a.facet) < std::tie(b.dim, b.facet); });
  std::sort(out.critical.begin(), out.critical.end(),
            [](const auto& a, const auto& b) { return std::tie(a.dim, a.gid) < std::tie(b.dim, b.gid); });
  return out;
}

}  // namespace ptopo::algo
