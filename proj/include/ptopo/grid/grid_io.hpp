#pragma once

#include <map>
#include <string>
#include <vector>

#include "ptopo/grid/freudenthal.hpp"

namespace ptopo {

/// A regular grid with vertex fields in global row-major order.
struct GridData {
  Coords dims{1, 1, 1};
  Point origin{0, 0, 0};
  Point spacing{1, 1, 1};
  bool periodic = false;
  std::map<std::string, std::vector<double>> fields;

  GridModel model() const { return GridModel(dims, periodic); }
};

/// Header lines: `dims`, `origin`, `spacing`, `periodic 0|1`, `dtype f32|f64`
/// and one `field <name> <raw file>` line per field. Raw files are
/// little-endian and resolved relative to the header.
GridData read_grid(const std::string& header_path);
void write_grid(const std::string& header_path, const GridData& grid, const std::string& dtype = "f64");

/// Raw little-endian doubles.
void write_raw(const std::string& path, const std::vector<double>& values);
std::vector<double> read_raw(const std::string& path, std::size_t count, const std::string& dtype = "f64");

}  // namespace ptopo
