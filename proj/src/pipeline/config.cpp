#include "ptopo/pipeline/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace ptopo::pipeline {

namespace {

constexpr std::pair<Algorithm, const char*> kNames[] = {
    {Algorithm::ScalarFieldSmoother, "ScalarFieldSmoother"},
    {Algorithm::ScalarFieldNormalizer, "ScalarFieldNormalizer"},
    {Algorithm::ArrayPreconditioning, "ArrayPreconditioning"},
    {Algorithm::ScalarFieldCriticalPoints, "ScalarFieldCriticalPoints"},
    {Algorithm::DiscreteGradient, "DiscreteGradient"},
    {Algorithm::IntegralLines, "IntegralLines"},
    {Algorithm::GeometrySmoother, "GeometrySmoother"},
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

template <class T> T parse_number(const std::string& s, int line, const std::string& what) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(line, "invalid " + what + " '" + s + "'");
  return v;
}

bool parse_flag(const std::string& s, int line, const std::string& key) {
  if (s == "1" || s == "on" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "off" || s == "false" || s == "no") return false;
  throw ConfigError(line, "invalid value '" + s + "' for " + key);
}

Coords parse_dims(const std::string& s, int line) {
  Coords d{1, 1, 1};
  std::size_t start = 0;
  int axis = 0;
  while (true) {
    auto x = s.find('x', start);
    if (axis > 2) throw ConfigError(line, "too many grid dimensions in '" + s + "'");
    d[axis++] = parse_number<Id>(s.substr(start, x == std::string::npos ? x : x - start), line, "grid size");
    if (x == std::string::npos) break;
    start = x + 1;
  }
  for (Id n : d)
    if (n < 1) throw ConfigError(line, "grid sizes must be positive");
  return d;
}

InputSpec parse_input(const std::string& value, int line) {
  auto w = words(value);
  if (w.empty()) throw ConfigError(line, "empty input");
  InputSpec in;
  in.kind = w[0];
  static const std::set<std::string> kinds = {"grid", "mesh", "elevation", "random", "wavelet", "two_triangles",
                                              "kuhn_cube"};
  if (!kinds.count(in.kind)) throw ConfigError(line, "unknown input kind '" + in.kind + "'");
  std::size_t i = 1;
  if (!in.generated()) {
    if (w.size() != 2) throw ConfigError(line, "input " + in.kind + " takes exactly one path");
    in.path = w[1];
    return in;
  }
  if (in.generated_grid()) {
    if (w.size() < 2) throw ConfigError(line, "input " + in.kind + " needs grid sizes such as 16x16x16");
    in.dims = parse_dims(w[1], line);
    i = 2;
  }
  for (; i < w.size(); ++i) {
    const auto& opt = w[i];
    if (opt.rfind("seed=", 0) == 0) {
      in.seed = parse_number<std::uint64_t>(opt.substr(5), line, "seed");
    } else if (opt == "periodic" && in.generated_grid()) {
      in.periodic = true;
    } else if (opt == "explicit" && in.generated_grid()) {
      in.as_mesh = true;
    } else {
      throw ConfigError(line, "unknown input option '" + opt + "'");
    }
  }
  if (in.periodic && in.as_mesh) throw ConfigError(line, "periodic grids cannot be handed over as meshes");
  return in;
}

std::vector<Id> parse_ids(const std::string& s, int line) {
  std::vector<Id> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) out.push_back(parse_number<Id>(item, line, "vertex id"));
  if (out.empty()) throw ConfigError(line, "empty seed list");
  return out;
}

Step parse_step(const std::vector<std::string>& w, int line) {
  if (w.size() < 3) throw ConfigError(line, "expected 'step LABEL Algorithm key=value...'");
  Step s;
  s.label = w[1];
  s.line = line;
  auto a = algorithm_from_string(w[2]);
  if (!a) throw ConfigError(line, "unknown algorithm '" + w[2] + "'");
  s.algorithm = *a;

  std::set<std::string> allowed;
  switch (s.algorithm) {
    case Algorithm::ScalarFieldSmoother: allowed = {"field", "iterations"}; break;
    case Algorithm::ScalarFieldNormalizer:
    case Algorithm::ArrayPreconditioning:
    case Algorithm::DiscreteGradient: allowed = {"field"}; break;
    case Algorithm::ScalarFieldCriticalPoints: allowed = {"field", "lines"}; break;
    case Algorithm::IntegralLines: allowed = {"field", "seeds", "seed_index", "direction"}; break;
    case Algorithm::GeometrySmoother: allowed = {"lines", "iterations"}; break;
  }
  std::set<std::string> seen;
  for (std::size_t i = 3; i < w.size(); ++i) {
    auto eq = w[i].find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(line, "expected key=value, got '" + w[i] + "'");
    auto key = w[i].substr(0, eq);
    auto value = w[i].substr(eq + 1);
    if (!allowed.count(key)) throw ConfigError(line, std::string(to_string(s.algorithm)) + " has no parameter '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(line, "parameter '" + key + "' given twice");
    if (value.empty()) throw ConfigError(line, "empty value for '" + key + "'");
    if (key == "field") {
      s.field = value;
    } else if (key == "iterations") {
      s.iterations = parse_number<int>(value, line, "iteration count");
      if (s.iterations < 0) throw ConfigError(line, "iteration count must not be negative");
    } else if (key == "seeds") {
      if (value.rfind("ids:", 0) == 0)
        s.seed_ids = parse_ids(value.substr(4), line);
      else
        s.seeds = value;
    } else if (key == "seed_index") {
      s.seed_index = parse_number<int>(value, line, "critical index");
      if (s.seed_index < 0 || s.seed_index > 3) throw ConfigError(line, "seed_index must be between 0 and 3");
    } else if (key == "direction") {
      if (value == "forward")
        s.direction = algo::Direction::Forward;
      else if (value == "backward")
        s.direction = algo::Direction::Backward;
      else
        throw ConfigError(line, "direction must be forward or backward");
    } else if (key == "lines") {
      s.lines = value;
    }
  }
  bool needs_field = s.algorithm != Algorithm::GeometrySmoother;
  if (needs_field && s.field.empty()) throw ConfigError(line, "step " + s.label + " needs field=");
  if (s.algorithm == Algorithm::GeometrySmoother && s.lines.empty())
    throw ConfigError(line, "step " + s.label + " needs lines=");
  if (s.algorithm == Algorithm::IntegralLines && s.seeds.empty() && s.seed_ids.empty())
    throw ConfigError(line, "step " + s.label + " needs seeds=");
  if (s.seed_index >= 0 && s.seeds.empty())
    throw ConfigError(line, "seed_index only applies to seeds taken from a critical point step");
  return s;
}

/// Checks that every reference points to an earlier step of the right kind.
/// Names that match no step are input fields, checked against `inputs` when
/// it is known.
void check_references(const PipelineConfig& c, const std::vector<std::string>* inputs) {
  std::map<std::string, Algorithm> earlier;
  auto is_input = [&](const std::string& name) {
    return !inputs || std::find(inputs->begin(), inputs->end(), name) != inputs->end();
  };
  for (const auto& s : c.steps) {
    auto where = "step " + s.label + ": ";
    if (!s.field.empty()) {
      auto it = earlier.find(s.field);
      if (it != earlier.end()) {
        if (!produces_field(it->second))
          throw ConfigError(s.line, where + "'" + s.field + "' is a " + to_string(it->second) + " step, not a field");
      } else if (!is_input(s.field)) {
        throw ConfigError(s.line, where + "unknown field '" + s.field + "'");
      }
    }
    if (!s.seeds.empty()) {
      auto it = earlier.find(s.seeds);
      if (it == earlier.end() || it->second != Algorithm::ScalarFieldCriticalPoints)
        throw ConfigError(s.line, where + "seed source '" + s.seeds + "' is not an earlier critical point step");
      auto src = std::find_if(c.steps.begin(), c.steps.end(), [&](const Step& x) { return x.label == s.seeds; });
      if (!src->lines.empty())
        throw ConfigError(s.line, where + "seed source '" + s.seeds + "' is restricted to lines");
    }
    if (!s.lines.empty()) {
      auto it = earlier.find(s.lines);
      if (it == earlier.end() ||
          (it->second != Algorithm::IntegralLines && it->second != Algorithm::GeometrySmoother))
        throw ConfigError(s.line, where + "'" + s.lines + "' is not an earlier IntegralLines or GeometrySmoother step");
    }
    if (earlier.count(s.label)) throw ConfigError(s.line, "duplicate step label '" + s.label + "'");
    if (inputs && is_input(s.label)) throw ConfigError(s.line, "step label '" + s.label + "' shadows an input field");
    earlier[s.label] = s.algorithm;
  }
  for (const auto& e : c.exports)
    if (!is_input(e)) throw ConfigError(0, "export: unknown input field '" + e + "'");
}

}  // namespace

const char* to_string(Algorithm a) {
  for (auto& [k, name] : kNames)
    if (k == a) return name;
  return "?";
}

std::optional<Algorithm> algorithm_from_string(const std::string& name) {
  for (auto& [k, n] : kNames)
    if (name == n) return k;
  return std::nullopt;
}

bool produces_field(Algorithm a) {
  return a == Algorithm::ScalarFieldSmoother || a == Algorithm::ScalarFieldNormalizer ||
         a == Algorithm::ArrayPreconditioning;
}

const std::map<std::string, std::string>& bundled_pipelines() {
  static const std::map<std::string, std::string> suite = {
      {"preconditioning",
       "step AP ArrayPreconditioning field=f\n"
       "step SFCP1 ScalarFieldCriticalPoints field=AP\n"},
      {"smoothing",
       "step SFS ScalarFieldSmoother field=f iterations=10\n"
       "step SFN ScalarFieldNormalizer field=SFS\n"},
      {"gradient",
       "step AP ArrayPreconditioning field=f\n"
       "step DG DiscreteGradient field=AP\n"},
      {"integrated",
       "step SFS1 ScalarFieldSmoother field=f iterations=10\n"
       "step SFS2 ScalarFieldSmoother field=grad iterations=10\n"
       "step SFN1 ScalarFieldNormalizer field=SFS1\n"
       "step AP ArrayPreconditioning field=SFN1\n"
       "step SFCP1 ScalarFieldCriticalPoints field=AP\n"
       "step IL IntegralLines field=AP seeds=SFCP1\n"
       "step GS GeometrySmoother lines=IL iterations=10\n"
       "step SFCP2 ScalarFieldCriticalPoints field=SFS2 lines=GS\n"},
  };
  return suite;
}

std::vector<std::string> generated_fields() { return {"f", "grad"}; }

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig c;
  std::istringstream in(text);
  std::set<std::string> keys;
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    auto hash = raw.find('#');
    auto line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    auto w = words(line);
    if (w[0] == "step") {
      c.steps.push_back(parse_step(w, line_no));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value' or a step line");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (!keys.insert(key).second) throw ConfigError(line_no, "key '" + key + "' given twice");
    if (value.empty()) throw ConfigError(line_no, "empty value for '" + key + "'");
    if (key == "input") {
      c.input = parse_input(value, line_no);
    } else if (key == "ranks") {
      c.n_ranks = parse_number<int>(value, line_no, "rank count");
      if (c.n_ranks < 1) throw ConfigError(line_no, "rank count must be at least 1");
    } else if (key == "backend") {
      if (value == "simulated")
        c.backend = comm::Backend::Simulated;
      else if (value == "tcp")
        c.backend = comm::Backend::Tcp;
      else
        throw ConfigError(line_no, "backend must be simulated or tcp");
    } else if (key == "output") {
      c.output_dir = value;
    } else if (key == "timing") {
      c.timing = parse_flag(value, line_no, key);
    } else if (key == "export") {
      std::stringstream list(value);
      for (std::string item; std::getline(list, item, ',');)
        if (!trim(item).empty()) c.exports.push_back(trim(item));
    } else {
      throw ConfigError(line_no, "unknown key '" + key + "'");
    }
  }
  if (c.input.kind.empty()) throw ConfigError(0, "missing 'input'");
  if (c.input.generated()) {
    auto names = generated_fields();
    check_references(c, &names);
  } else {
    check_references(c, nullptr);
  }
  return c;
}

PipelineConfig read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(0, "cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  auto c = parse_config(ss.str());
  auto base = std::filesystem::path(path).parent_path();
  if (!c.input.generated() && std::filesystem::path(c.input.path).is_relative())
    c.input.path = (base / c.input.path).string();
  return c;
}

void check_input_fields(const PipelineConfig& config, const std::vector<std::string>& input_fields) {
  check_references(config, &input_fields);
}

}  // namespace ptopo::pipeline
