#include "ptopo/mesh/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "ptopo/mesh/explicit_triangulation.hpp"

namespace ptopo {

namespace {

template <class T> T expect(std::istream& in, const char* what) {
  T v;
  if (!(in >> v)) throw MeshError(std::string("mesh file: cannot read ") + what);
  return v;
}

}  // namespace

MeshData parse_mesh(std::istream& in) {
  MeshData m;
  m.dim = expect<int>(in, "dimension");
  if (m.dim < 1 || m.dim > 3) throw MeshError("mesh file: dimension must be 1, 2 or 3");
  const auto nv = expect<long long>(in, "vertex count");
  const auto nc = expect<long long>(in, "cell count");
  if (nv < 0 || nc < 0) throw MeshError("mesh file: negative counts");
  m.points.resize(static_cast<std::size_t>(nv));
  for (auto& p : m.points)
    for (auto& x : p) x = expect<double>(in, "vertex coordinate");
  m.cells.resize(static_cast<std::size_t>(nc));
  for (auto& c : m.cells) {
    c.resize(static_cast<std::size_t>(m.dim + 1));
    for (auto& v : c) v = expect<Id>(in, "cell vertex index");
  }
  std::string word;
  while (in >> word) {
    if (word != "field") throw MeshError("mesh file: unexpected token '" + word + "'");
    auto name = expect<std::string>(in, "field name");
    std::vector<double> values(static_cast<std::size_t>(nv));
    for (auto& x : values) x = expect<double>(in, "field value");
    m.fields[name] = std::move(values);
  }
  return m;
}

MeshData read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path);
  return parse_mesh(in);
}

void write_mesh(std::ostream& out, const MeshData& m) {
  out << std::setprecision(17);
  out << m.dim << ' ' << m.points.size() << ' ' << m.cells.size() << '\n';
  for (const auto& p : m.points) out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  for (const auto& c : m.cells) {
    for (std::size_t i = 0; i < c.size(); ++i) out << (i ? " " : "") << c[i];
    out << '\n';
  }
  for (const auto& [name, values] : m.fields) {
    out << "field " << name << '\n';
    for (double x : values) out << x << '\n';
  }
}

void write_mesh(const std::string& path, const MeshData& m) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file " + path);
  write_mesh(out, m);
}

}  // namespace ptopo
