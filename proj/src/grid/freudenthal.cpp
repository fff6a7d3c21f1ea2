#include "ptopo/grid/freudenthal.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace ptopo {

namespace {

using ClassTable = std::array<std::vector<SimplexClass>, 4>;

void extend_chain(int full, SimplexClass cur, int depth, int k, std::vector<SimplexClass>& out) {
  if (depth == k) {
    out.push_back(cur);
    return;
  }
  for (int m = 1; m <= full; ++m) {
    if ((m & ~full) || (m & cur.union_mask)) continue;
    SimplexClass next = cur;
    next.masks[depth] = m;
    next.union_mask |= m;
    extend_chain(full, next, depth + 1, k, out);
  }
}

ClassTable make_classes(int dim) {
  ClassTable t;
  const int full = (1 << dim) - 1;
  for (int k = 1; k <= dim; ++k) {
    SimplexClass start;
    start.k = k;
    extend_chain(full, start, 0, k, t[k]);
  }
  return t;
}

const ClassTable& class_table(int dim) {
  static const ClassTable two = make_classes(2);
  static const ClassTable three = make_classes(3);
  return dim == 2 ? two : three;
}

Coords mask_vector(int m) { return {m & 1 ? 1 : 0, m & 2 ? 1 : 0, m & 4 ? 1 : 0}; }

}  // namespace

GridModel::GridModel(Coords dims, bool periodic) : periodic_(periodic), dims_(dims) {
  dim_ = dims[2] == 1 ? 2 : 3;
  for (int a = 0; a < 3; ++a) {
    if (a < dim_ && dims[a] < 2) throw GridError("grid dimensions must be at least 2 along every active axis");
    if (a >= dim_ && dims[a] != 1) throw GridError("inactive grid axis must have size 1");
    if (periodic && a < dim_ && dims[a] < 3)
      throw GridError("periodic grids need at least 3 vertices along every axis");
  }
  for (int k = 1; k <= dim_; ++k) {
    const auto& cls = classes(k);
    Id acc = 0;
    for (int c = 0; c < static_cast<int>(cls.size()); ++c) {
      offsets_[k].push_back(acc);
      auto box = anchor_box(k, c);
      acc += box[0] * box[1] * box[2];
    }
    offsets_[k].push_back(acc);
  }
}

const std::vector<SimplexClass>& GridModel::classes(int k) const {
  static const std::vector<SimplexClass> none;
  if (k < 1 || k > dim_) return none;
  return class_table(dim_)[k];
}

int GridModel::find_class(int k, const std::array<int, 3>& masks) const {
  const auto& cls = classes(k);
  for (int c = 0; c < static_cast<int>(cls.size()); ++c) {
    bool same = true;
    for (int i = 0; i < k; ++i) same = same && cls[c].masks[i] == masks[i];
    if (same) return c;
  }
  return -1;
}

bool GridModel::contains(const Coords& c) const {
  for (int a = 0; a < 3; ++a)
    if (c[a] < 0 || c[a] >= dims_[a]) return false;
  return true;
}

Coords GridModel::wrap(Coords c) const {
  if (!periodic_) return c;
  for (int a = 0; a < 3; ++a) c[a] = ((c[a] % dims_[a]) + dims_[a]) % dims_[a];
  return c;
}

Id GridModel::vertex_id(Coords c) const {
  c = wrap(c);
  if (!contains(c)) {
    std::ostringstream os;
    os << "vertex (" << c[0] << "," << c[1] << "," << c[2] << ") outside grid " << dims_[0] << "x" << dims_[1] << "x"
       << dims_[2];
    throw GridError(os.str());
  }
  return c[0] + dims_[0] * (c[1] + dims_[1] * c[2]);
}

Coords GridModel::vertex_coords(Id id) const {
  return {id % dims_[0], (id / dims_[0]) % dims_[1], id / (dims_[0] * dims_[1])};
}

Coords GridModel::anchor_box(int k, int c) const {
  const int u = simplex_class(k, c).union_mask;
  Coords box = dims_;
  if (!periodic_)
    for (int a = 0; a < dim_; ++a)
      if (u & (1 << a)) box[a] -= 1;
  return box;
}

Id GridModel::simplex_count(int k) const {
  if (k == 0) return vertex_count();
  if (k < 0 || k > dim_) return 0;
  return offsets_[k].back();
}

Id GridModel::simplex_id(int k, int c, Coords anchor) const {
  if (k == 0) return vertex_id(anchor);
  anchor = wrap(anchor);
  auto box = anchor_box(k, c);
  for (int a = 0; a < 3; ++a)
    if (anchor[a] < 0 || anchor[a] >= box[a]) throw GridError("simplex anchor outside its class box");
  return offsets_[k][c] + anchor[0] + box[0] * (anchor[1] + box[1] * anchor[2]);
}

std::pair<int, Coords> GridModel::decode(int k, Id id) const {
  if (k == 0) return {0, vertex_coords(id)};
  if (id < 0 || id >= simplex_count(k)) {
    std::ostringstream os;
    os << "invalid " << k << "-simplex id " << id;
    throw GridError(os.str());
  }
  const auto& off = offsets_[k];
  int c = static_cast<int>(std::upper_bound(off.begin(), off.end(), id) - off.begin()) - 1;
  auto box = anchor_box(k, c);
  Id local = id - off[c];
  return {c, {local % box[0], (local / box[0]) % box[1], local / (box[0] * box[1])}};
}

std::array<Coords, 4> GridModel::chain(int k, int c, const Coords& anchor) const {
  std::array<Coords, 4> out{};
  out[0] = anchor;
  const auto& cls = simplex_class(k, c);
  for (int i = 0; i < k; ++i) {
    auto d = mask_vector(cls.masks[i]);
    for (int a = 0; a < 3; ++a) out[i + 1][a] = out[i][a] + d[a];
  }
  return out;
}

SimplexVertices GridModel::simplex_vertices(int k, Id id) const {
  SimplexVertices s;
  s.dim = k;
  if (k == 0) {
    if (id < 0 || id >= vertex_count()) throw GridError("invalid vertex id");
    s.v[0] = id;
    return s;
  }
  auto [c, anchor] = decode(k, id);
  auto ch = chain(k, c, anchor);
  for (int i = 0; i <= k; ++i) s.v[i] = vertex_id(ch[i]);
  std::sort(s.v.begin(), s.v.begin() + k + 1);
  return s;
}

Id GridModel::find_simplex(const SimplexVertices& s) const {
  const int k = s.dim;
  if (k < 0 || k > dim_) return -1;
  for (int i = 0; i <= k; ++i)
    if (s.v[i] < 0 || s.v[i] >= vertex_count()) return -1;
  if (k == 0) return s.v[0];
  for (int i = 0; i <= k; ++i) {
    const Coords a = vertex_coords(s.v[i]);
    std::array<int, 4> m{};
    bool ok = true;
    for (int j = 0; j <= k && ok; ++j) {
      const Coords b = vertex_coords(s.v[j]);
      int mask = 0;
      for (int ax = 0; ax < dim_ && ok; ++ax) {
        Id d = b[ax] - a[ax];
        if (periodic_) d = ((d % dims_[ax]) + dims_[ax]) % dims_[ax];
        if (d == 1) mask |= 1 << ax;
        else if (d != 0) ok = false;
      }
      m[j] = mask;
    }
    if (!ok) continue;
    std::sort(m.begin(), m.begin() + k + 1,
              [](int x, int y) { return std::popcount(static_cast<unsigned>(x)) < std::popcount(static_cast<unsigned>(y)); });
    if (m[0] != 0) continue;
    std::array<int, 3> masks{};
    for (int j = 1; j <= k && ok; ++j) {
      if ((m[j - 1] & m[j]) != m[j - 1] || m[j] == m[j - 1]) ok = false;
      masks[j - 1] = m[j] & ~m[j - 1];
    }
    if (!ok) continue;
    int c = find_class(k, masks);
    if (c < 0) continue;
    Coords anchor = a;
    if (!periodic_) {
      auto box = anchor_box(k, c);
      bool inside = true;
      for (int ax = 0; ax < 3; ++ax) inside = inside && anchor[ax] < box[ax];
      if (!inside) continue;
    }
    return simplex_id(k, c, anchor);
  }
  return -1;
}

void GridModel::vertex_star(Id v, int k, std::vector<Id>& out) const {
  out.clear();
  if (k < 1 || k > dim_) return;
  const Coords p = vertex_coords(v);
  const auto& cls = classes(k);
  for (int c = 0; c < static_cast<int>(cls.size()); ++c) {
    auto box = anchor_box(k, c);
    Coords shift{0, 0, 0};
    for (int j = 0; j <= k; ++j) {
      if (j > 0) {
        auto d = mask_vector(cls[c].masks[j - 1]);
        for (int a = 0; a < 3; ++a) shift[a] += d[a];
      }
      Coords anchor{p[0] - shift[0], p[1] - shift[1], p[2] - shift[2]};
      if (periodic_) {
        anchor = wrap(anchor);
      } else {
        bool inside = true;
        for (int a = 0; a < 3; ++a) inside = inside && anchor[a] >= 0 && anchor[a] < box[a];
        if (!inside) continue;
      }
      out.push_back(offsets_[k][c] + anchor[0] + box[0] * (anchor[1] + box[1] * anchor[2]));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

void GridModel::vertex_neighbors(Id v, std::vector<Id>& out) const {
  out.clear();
  const Coords p = vertex_coords(v);
  const int full = (1 << dim_) - 1;
  auto visit = [&](int m, int sign) {
    auto d = mask_vector(m);
    Coords q{p[0] + sign * d[0], p[1] + sign * d[1], p[2] + sign * d[2]};
    if (periodic_) q = wrap(q);
    else if (!contains(q)) return;
    out.push_back(vertex_id(q));
  };
  for (int m = full; m >= 1; --m) visit(m, -1);
  for (int m = 1; m <= full; ++m) visit(m, +1);
}

bool GridModel::is_on_boundary(int k, Id id) const {
  if (periodic_) return false;
  std::array<Coords, 4> pts{};
  if (k == 0) {
    pts[0] = vertex_coords(id);
  } else {
    auto [c, anchor] = decode(k, id);
    pts = chain(k, c, anchor);
  }
  // True when the given vertices all lie on one face of the grid box.
  auto on_common_face = [&](int skip) {
    for (int a = 0; a < dim_; ++a) {
      bool low = true, high = true;
      for (int i = 0; i <= k; ++i) {
        if (i == skip) continue;
        low = low && pts[i][a] == 0;
        high = high && pts[i][a] == dims_[a] - 1;
      }
      if (low || high) return true;
    }
    return false;
  };
  if (k < dim_) return on_common_face(-1);
  for (int skip = 0; skip <= k; ++skip)
    if (on_common_face(skip)) return true;
  return false;
}

Point ImplicitTriangulation::vertex_point(Id v) const {
  auto c = model_.vertex_coords(v);
  return {origin_[0] + static_cast<double>(c[0]) * spacing_[0], origin_[1] + static_cast<double>(c[1]) * spacing_[1],
          origin_[2] + static_cast<double>(c[2]) * spacing_[2]};
}

std::vector<std::vector<Id>> grid_cells(const GridModel& model) {
  const int d = model.dimension();
  std::vector<std::vector<Id>> cells;
  cells.reserve(static_cast<std::size_t>(model.simplex_count(d)));
  for (Id c = 0; c < model.simplex_count(d); ++c) {
    auto s = model.simplex_vertices(d, c);
    cells.emplace_back(s.begin(), s.end());
  }
  return cells;
}

std::vector<Point> grid_points(const GridModel& model, const Point& origin, const Point& spacing) {
  ImplicitTriangulation t(model, origin, spacing);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(model.vertex_count()));
  for (Id v = 0; v < model.vertex_count(); ++v) pts.push_back(t.vertex_point(v));
  return pts;
}

}  // namespace ptopo
