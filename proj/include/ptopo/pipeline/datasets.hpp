#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptopo/grid/grid_io.hpp"
#include "ptopo/mesh/mesh_io.hpp"
#include "ptopo/pipeline/config.hpp"

namespace ptopo::pipeline {

/// Uniform doubles in [0, 1): the top 53 bits of successive mt19937_64
/// draws.
std::vector<double> random_values(std::size_t n, std::uint64_t seed);

/// Synthetic grid with fields `f` and `grad` (|grad f|). Coordinates are the
/// integer vertex coordinates.
///   elevation: f = x + y + z
///   random:    f = random_values(seed)
///   wavelet:   f = cos(3 pi r) exp(-r^2), r the distance to the center in
///              coordinates scaled to [-1, 1]
GridData make_grid_dataset(const std::string& kind, const Coords& dims, bool periodic, std::uint64_t seed);

/// Bundled meshes with fields `f` (random_values(seed)) and `grad`:
/// two_triangles (unit square, two triangles) and kuhn_cube (unit cube,
/// six tetrahedra).
MeshData make_mesh_dataset(const std::string& kind, std::uint64_t seed);

/// Central differences divided by the spacing; one-sided at the faces of a
/// non-periodic grid, wrapped when periodic.
std::vector<double> gradient_magnitude(const GridData& grid, const std::vector<double>& f);
/// Steepest slope over the edges incident to each vertex.
std::vector<double> gradient_magnitude(const MeshData& mesh, const std::vector<double>& f);

/// The non-periodic grid as an explicit mesh with the same vertex order and
/// fields.
MeshData grid_as_mesh(const GridData& grid);

/// A loaded input: exactly one of `grid` or `mesh` is used.
struct Dataset {
  bool is_grid = true;
  GridData grid;
  MeshData mesh;

  std::vector<std::string> field_names() const;
  std::size_t vertex_count() const { return is_grid ? grid.model().vertex_count() : mesh.points.size(); }
  Point vertex_point(Id v) const;
};

Dataset load_dataset(const InputSpec& input);

}  // namespace ptopo::pipeline
