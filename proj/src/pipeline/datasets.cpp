#include "ptopo/pipeline/datasets.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace ptopo::pipeline {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return out;
}

GridData make_grid_dataset(const std::string& kind, const Coords& dims, bool periodic, std::uint64_t seed) {
  GridData g;
  g.dims = dims;
  g.periodic = periodic;
  auto model = g.model();
  const Id n = model.vertex_count();
  std::vector<double> f(static_cast<std::size_t>(n));
  if (kind == "elevation") {
    for (Id v = 0; v < n; ++v) {
      auto c = model.vertex_coords(v);
      f[v] = static_cast<double>(c[0] + c[1] + c[2]);
    }
  } else if (kind == "random") {
    f = random_values(static_cast<std::size_t>(n), seed);
  } else if (kind == "wavelet") {
    for (Id v = 0; v < n; ++v) {
      auto c = model.vertex_coords(v);
      double r2 = 0;
      for (int a = 0; a < 3; ++a) {
        if (dims[a] < 2) continue;
        double u = 2.0 * static_cast<double>(c[a]) / static_cast<double>(dims[a] - 1) - 1.0;
        r2 += u * u;
      }
      f[v] = std::cos(3 * std::numbers::pi * std::sqrt(r2)) * std::exp(-r2);
    }
  } else {
    throw std::invalid_argument("unknown grid dataset '" + kind + "'");
  }
  g.fields["grad"] = gradient_magnitude(g, f);
  g.fields["f"] = std::move(f);
  return g;
}

MeshData make_mesh_dataset(const std::string& kind, std::uint64_t seed) {
  MeshData m;
  if (kind == "two_triangles") {
    m.dim = 2;
    m.points = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    m.cells = {{0, 1, 2}, {0, 2, 3}};
  } else if (kind == "kuhn_cube") {
    GridModel cube({2, 2, 2}, false);
    m.dim = 3;
    m.points = grid_points(cube, {0, 0, 0}, {1, 1, 1});
    m.cells = grid_cells(cube);
  } else {
    throw std::invalid_argument("unknown mesh dataset '" + kind + "'");
  }
  auto f = random_values(m.points.size(), seed);
  m.fields["grad"] = gradient_magnitude(m, f);
  m.fields["f"] = std::move(f);
  return m;
}

std::vector<double> gradient_magnitude(const GridData& grid, const std::vector<double>& f) {
  auto model = grid.model();
  const auto& d = grid.dims;
  std::vector<double> out(f.size());
  for (Id v = 0; v < model.vertex_count(); ++v) {
    auto c = model.vertex_coords(v);
    double sum = 0;
    for (int a = 0; a < 3; ++a) {
      if (d[a] < 2) continue;
      auto lo = c, hi = c;
      double steps = 2;
      if (grid.periodic) {
        lo[a] = (c[a] + d[a] - 1) % d[a];
        hi[a] = (c[a] + 1) % d[a];
      } else {
        lo[a] = std::max<Id>(c[a] - 1, 0);
        hi[a] = std::min<Id>(c[a] + 1, d[a] - 1);
        steps = static_cast<double>(hi[a] - lo[a]);
      }
      double g = (f[model.vertex_id(hi)] - f[model.vertex_id(lo)]) / (steps * grid.spacing[a]);
      sum += g * g;
    }
    out[v] = std::sqrt(sum);
  }
  return out;
}

std::vector<double> gradient_magnitude(const MeshData& mesh, const std::vector<double>& f) {
  std::vector<double> out(mesh.points.size(), 0.0);
  for (const auto& cell : mesh.cells)
    for (std::size_t i = 0; i < cell.size(); ++i)
      for (std::size_t j = i + 1; j < cell.size(); ++j) {
        auto a = cell[i], b = cell[j];
        double len = 0;
        for (int k = 0; k < 3; ++k) len += (mesh.points[a][k] - mesh.points[b][k]) * (mesh.points[a][k] - mesh.points[b][k]);
        double slope = std::abs(f[a] - f[b]) / std::sqrt(len);
        out[a] = std::max(out[a], slope);
        out[b] = std::max(out[b], slope);
      }
  return out;
}

MeshData grid_as_mesh(const GridData& grid) {
  if (grid.periodic) throw std::invalid_argument("a periodic grid has no explicit mesh counterpart");
  auto model = grid.model();
  MeshData m;
  m.dim = model.dimension();
  m.points = grid_points(model, grid.origin, grid.spacing);
  m.cells = grid_cells(model);
  m.fields = grid.fields;
  return m;
}

std::vector<std::string> Dataset::field_names() const {
  std::vector<std::string> out;
  for (auto& [name, _] : is_grid ? grid.fields : mesh.fields) out.push_back(name);
  return out;
}

Point Dataset::vertex_point(Id v) const {
  if (!is_grid) return mesh.points[static_cast<std::size_t>(v)];
  auto c = grid.model().vertex_coords(v);
  Point p;
  for (int a = 0; a < 3; ++a) p[a] = grid.origin[a] + grid.spacing[a] * static_cast<double>(c[a]);
  return p;
}

Dataset load_dataset(const InputSpec& input) {
  Dataset d;
  if (input.kind == "grid") {
    d.grid = read_grid(input.path);
  } else if (input.kind == "mesh") {
    d.is_grid = false;
    d.mesh = read_mesh(input.path);
  } else if (input.generated_grid()) {
    d.grid = make_grid_dataset(input.kind, input.dims, input.periodic, input.seed);
    if (input.as_mesh) {
      d.is_grid = false;
      d.mesh = grid_as_mesh(d.grid);
      d.grid = GridData{};
    }
  } else {
    d.is_grid = false;
    d.mesh = make_mesh_dataset(input.kind, input.seed);
  }
  return d;
}

}  // namespace ptopo::pipeline
