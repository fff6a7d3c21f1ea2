#include "ptopo/grid/grid_io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ptopo {

namespace fs = std::filesystem;

std::vector<double> read_raw(const std::string& path, std::size_t count, const std::string& dtype) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GridError("cannot open raw file " + path);
  std::vector<double> out(count);
  if (dtype == "f64") {
    in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(count * sizeof(double)));
  } else if (dtype == "f32") {
    std::vector<float> tmp(count);
    in.read(reinterpret_cast<char*>(tmp.data()), static_cast<std::streamsize>(count * sizeof(float)));
    for (std::size_t i = 0; i < count; ++i) out[i] = tmp[i];
  } else {
    throw GridError("unsupported dtype '" + dtype + "'");
  }
  if (!in) throw GridError("raw file " + path + " is shorter than the grid");
  return out;
}

void write_raw(const std::string& path, const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw GridError("cannot write raw file " + path);
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
}

GridData read_grid(const std::string& header_path) {
  std::ifstream in(header_path);
  if (!in) throw GridError("cannot open grid header " + header_path);
  GridData g;
  std::string dtype = "f64";
  std::vector<std::pair<std::string, std::string>> field_files;
  bool have_dims = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    bool ok = true;
    if (key == "dims") {
      ok = static_cast<bool>(ls >> g.dims[0] >> g.dims[1] >> g.dims[2]);
      have_dims = true;
    } else if (key == "origin") {
      ok = static_cast<bool>(ls >> g.origin[0] >> g.origin[1] >> g.origin[2]);
    } else if (key == "spacing") {
      ok = static_cast<bool>(ls >> g.spacing[0] >> g.spacing[1] >> g.spacing[2]);
    } else if (key == "periodic") {
      int p = 0;
      ok = static_cast<bool>(ls >> p);
      g.periodic = p != 0;
    } else if (key == "dtype") {
      ok = static_cast<bool>(ls >> dtype);
    } else if (key == "field") {
      std::string name, file;
      ok = static_cast<bool>(ls >> name >> file);
      field_files.emplace_back(name, file);
    } else {
      throw GridError(header_path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (!ok) throw GridError(header_path + ":" + std::to_string(lineno) + ": malformed '" + key + "' line");
  }
  if (!have_dims) throw GridError(header_path + ": missing dims");
  for (double s : g.spacing)
    if (!(s > 0)) throw GridError(header_path + ": spacing must be positive");
  const auto n = static_cast<std::size_t>(g.dims[0] * g.dims[1] * g.dims[2]);
  const fs::path dir = fs::path(header_path).parent_path();
  for (auto& [name, file] : field_files) g.fields[name] = read_raw((dir / file).string(), n, dtype);
  return g;
}

void write_grid(const std::string& header_path, const GridData& g, const std::string& dtype) {
  if (dtype != "f64") throw GridError("only f64 output is supported");
  const fs::path hp(header_path);
  std::ofstream out(header_path);
  if (!out) throw GridError("cannot write grid header " + header_path);
  out << std::setprecision(17);
  out << "dims " << g.dims[0] << ' ' << g.dims[1] << ' ' << g.dims[2] << '\n';
  out << "origin " << g.origin[0] << ' ' << g.origin[1] << ' ' << g.origin[2] << '\n';
  out << "spacing " << g.spacing[0] << ' ' << g.spacing[1] << ' ' << g.spacing[2] << '\n';
  out << "periodic " << (g.periodic ? 1 : 0) << '\n';
  out << "dtype " << dtype << '\n';
  for (const auto& [name, values] : g.fields) {
    const std::string file = hp.stem().string() + "." + name + ".raw";
    out << "field " << name << ' ' << file << '\n';
    write_raw((hp.parent_path() / file).string(), values);
  }
}

}  // namespace ptopo
