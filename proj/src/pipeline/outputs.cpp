#include "ptopo/pipeline/outputs.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ptopo::pipeline {

namespace fs = std::filesystem;

namespace {

std::string join_ids(const SimplexVertices& s) {
  std::string out;
  for (Id v : s) {
    if (!out.empty()) out += ' ';
    out += std::to_string(v);
  }
  return out;
}

void put_point(std::ostream& os, const Point& p) {
  os << format_double(p[0]) << ',' << format_double(p[1]) << ',' << format_double(p[2]);
}

std::string critical_points_csv(const std::vector<algo::CriticalPoint>& points) {
  std::ostringstream os;
  os << "global_vertex_id,index,degenerate,boundary,x,y,z,owner_rank\n";
  for (const auto& p : points) {
    os << p.gid << ',' << p.index << ',' << int(p.degenerate) << ',' << int(p.boundary) << ',';
    put_point(os, p.position);
    os << ',' << p.owner << '\n';
  }
  return os.str();
}

std::string line_critical_points_csv(const std::vector<algo::LineCriticalPoint>& points) {
  std::ostringstream os;
  os << "seed,fork_path,step,global_vertex_id,index,value,x,y,z\n";
  for (const auto& p : points) {
    os << p.seed << ',' << algo::fork_path_string(p.fork_path) << ',' << p.step << ',' << p.gid << ',' << p.index
       << ',' << format_double(p.value) << ',';
    put_point(os, p.position);
    os << '\n';
  }
  return os.str();
}

std::string lines_csv(const std::vector<algo::IntegralLine>& lines) {
  std::ostringstream os;
  os << "seed,fork_path,step,global_vertex_id,x,y,z,distance,owner_rank\n";
  for (const auto& l : lines) {
    auto path = algo::fork_path_string(l.fork_path);
    for (std::size_t i = 0; i < l.vertices.size(); ++i) {
      os << l.seed << ',' << path << ',' << i << ',' << l.vertices[i] << ',';
      put_point(os, l.points[i]);
      os << ',' << format_double(l.distance[i]) << ',' << l.owner[i] << '\n';
    }
  }
  return os.str();
}

std::string gradient_csv(const algo::DiscreteGradient& g) {
  std::ostringstream os;
  os << "kind,dim,global_id,vertices,cofacet_global_id,cofacet_vertices\n";
  for (const auto& c : g.critical) os << "critical," << c.dim << ',' << c.gid << ',' << join_ids(c.vertices) << ",,\n";
  for (const auto& p : g.pairs)
    os << "pair," << p.dim << ',' << p.facet << ',' << join_ids(p.facet_vertices) << ',' << p.cofacet << ','
       << join_ids(p.cofacet_vertices) << '\n';
  return os.str();
}

std::string raw_bytes(const std::vector<double>& values) {
  static_assert(std::endian::native == std::endian::little);
  std::string out(values.size() * sizeof(double), '\0');
  if (!values.empty()) std::memcpy(out.data(), values.data(), out.size());
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Lines with the rank-dependent owner_rank columns removed, data lines
/// sorted.
std::vector<std::string> sorted_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::vector<bool> keep;
  for (std::string l; std::getline(in, l);) {
    auto fields = split_csv(l);
    if (keep.empty())
      for (auto& f : fields) keep.push_back(f != "owner_rank");
    std::string kept;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i < keep.size() && !keep[i]) continue;
      if (!kept.empty() || i > 0) kept += ',';
      kept += fields[i];
    }
    out.push_back(kept);
  }
  if (!out.empty()) std::sort(out.begin() + 1, out.end());
  return out;
}

bool is_csv(const std::string& name) { return name.size() > 4 && name.ends_with(".csv"); }

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw OutputError("cannot write " + path.string());
  f << contents;
  if (!f) throw OutputError("error writing " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw OutputError("cannot create directory " + dir.string());
}

std::map<std::string, std::string> read_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw OutputError(dir + " is not a directory");
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto name = e.path().filename().string();
    if (name == "report.json") continue;
    std::ifstream f(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    out[name] = ss.str();
  }
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::map<std::string, std::string> render_outputs(const PipelineOutputs& o) {
  std::map<std::string, std::string> files;
  for (const auto& [name, values] : o.fields) files[name + ".raw"] = raw_bytes(values);
  for (const auto& [name, points] : o.critical_points) files[name + ".csv"] = critical_points_csv(points);
  for (const auto& [name, points] : o.line_critical_points) files[name + ".csv"] = line_critical_points_csv(points);
  for (const auto& [name, g] : o.gradients) files[name + ".csv"] = gradient_csv(g);
  for (const auto& [name, lines] : o.lines) files[name + ".csv"] = lines_csv(lines);
  return files;
}

std::string report_json(const ProfilingReport& r) {
  nlohmann::ordered_json j;
  j["ranks"] = r.ranks;
  j["timing"] = r.timing;
  j["cached"] = r.cached;
  j["total_seconds"] = r.total_seconds;
  j["precondition_seconds"] = r.precondition_seconds;
  j["setup_builds"] = r.setup_builds;
  auto& steps = j["steps"] = nlohmann::ordered_json::array();
  for (const auto& s : r.steps) {
    nlohmann::ordered_json e;
    e["label"] = s.label;
    e["algorithm"] = s.algorithm;
    e["seconds"] = s.seconds;
    e["precondition_seconds"] = s.precondition_seconds;
    e["builds"] = s.builds;
    e["warnings"] = s.warnings;
    steps.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

void write_outputs(const RunResult& result, const std::string& dir) {
  make_dir(dir);
  for (const auto& [name, contents] : render_outputs(result.outputs)) write_file(fs::path(dir) / name, contents);
  write_file(fs::path(dir) / "report.json", report_json(result.report));
}

void write_block_dump(const dist::GhostedBlock& b, const std::string& dir) {
  auto sub = fs::path(dir) / "ranks";
  make_dir(sub);
  auto prefix = "rank" + std::to_string(b.rank()) + "_";

  std::ostringstream v;
  v << "local_id,global_id,owner_rank,ghost,x,y,z";
  for (const auto& [name, _] : b.fields) v << ',' << name;
  v << '\n';
  for (Id i = 0; i < b.local_count(0); ++i) {
    v << i << ',' << b.global_id(0, i) << ',' << b.owner(0, i) << ',' << int(b.is_ghost(0, i)) << ',';
    put_point(v, b.position(i));
    for (const auto& [_, values] : b.fields) v << ',' << format_double(values[static_cast<std::size_t>(i)]);
    v << '\n';
  }
  write_file(sub / (prefix + "vertices.csv"), v.str());

  std::ostringstream c;
  c << "local_id,global_id,owner_rank,ghost,vertices\n";
  const int d = b.dimension();
  for (Id i = 0; i < b.local_count(d); ++i)
    c << i << ',' << b.global_id(d, i) << ',' << b.owner(d, i) << ',' << int(b.is_ghost(d, i)) << ','
      << join_ids(b.global_vertices(d, i)) << '\n';
  write_file(sub / (prefix + "cells.csv"), c.str());

  std::ostringstream l;
  l << "neighbor_rank\n";
  for (int r : b.neighbors()) l << r << '\n';
  write_file(sub / (prefix + "lag.csv"), l.str());
}

std::vector<std::string> compare_rendered(const std::map<std::string, std::string>& a,
                                          const std::map<std::string, std::string>& b) {
  std::vector<std::string> diffs;
  for (const auto& [name, contents] : a) {
    auto it = b.find(name);
    if (it == b.end()) {
      diffs.push_back(name + ": missing from the second output");
      continue;
    }
    if (is_csv(name)) {
      auto la = sorted_lines(contents), lb = sorted_lines(it->second);
      if (la.size() != lb.size()) {
        diffs.push_back(name + ": " + std::to_string(la.size()) + " vs " + std::to_string(lb.size()) + " lines");
      } else {
        auto m = std::mismatch(la.begin(), la.end(), lb.begin());
        if (m.first != la.end()) diffs.push_back(name + ": '" + *m.first + "' vs '" + *m.second + "'");
      }
    } else if (contents != it->second) {
      diffs.push_back(name + ": contents differ");
    }
  }
  for (const auto& [name, _] : b)
    if (!a.count(name)) diffs.push_back(name + ": missing from the first output");
  return diffs;
}

std::vector<std::string> compare_output_dirs(const std::string& a, const std::string& b) {
  return compare_rendered(read_dir(a), read_dir(b));
}

}  // namespace ptopo::pipeline
