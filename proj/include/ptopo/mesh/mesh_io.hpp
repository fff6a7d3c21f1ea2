#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ptopo/mesh/triangulation.hpp"

namespace ptopo {

/// A mesh with per-vertex scalar fields, as stored on disk.
struct MeshData {
  int dim = 0;
  std::vector<Point> points;
  std::vector<std::vector<Id>> cells;
  std::map<std::string, std::vector<double>> fields;
};

/// Text format: `dim V C`, V lines of three coordinates, C lines of dim+1
/// vertex indices, then any number of `field <name>` blocks of V values.
MeshData parse_mesh(std::istream& in);
MeshData read_mesh(const std::string& path);
void write_mesh(std::ostream& out, const MeshData& mesh);
void write_mesh(const std::string& path, const MeshData& mesh);

}  // namespace ptopo
