#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptopo/algo/integral_lines.hpp"
#include "ptopo/comm/communicator.hpp"
#include "ptopo/grid/freudenthal.hpp"

namespace ptopo::pipeline {

/// Invalid configuration; `line()` is 0 when the problem is not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class Algorithm {
  ScalarFieldSmoother,
  ScalarFieldNormalizer,
  ArrayPreconditioning,
  ScalarFieldCriticalPoints,
  DiscreteGradient,
  IntegralLines,
  GeometrySmoother,
};

const char* to_string(Algorithm a);
std::optional<Algorithm> algorithm_from_string(const std::string& name);
/// Whether the step's result is a vertex field that later steps can use.
bool produces_field(Algorithm a);

/// Where the data comes from. `kind` is "grid" or "mesh" for files, or a
/// generated dataset: elevation, random, wavelet (grids) or two_triangles,
/// kuhn_cube (meshes).
struct InputSpec {
  std::string kind;
  std::string path;
  Coords dims{8, 8, 8};
  bool periodic = false;
  /// Generated grids only: hand the grid over as an explicit mesh.
  bool as_mesh = false;
  std::uint64_t seed = 1;

  bool generated() const { return kind != "grid" && kind != "mesh"; }
  bool generated_grid() const { return kind == "elevation" || kind == "random" || kind == "wavelet"; }
};

struct Step {
  std::string label;
  Algorithm algorithm = Algorithm::ScalarFieldNormalizer;
  int line = 0;
  /// Input field: an input field name or the label of an earlier field step.
  std::string field;
  int iterations = 1;
  /// IntegralLines: label of an earlier critical point step, or empty when
  /// `seed_ids` is used.
  std::string seeds;
  std::vector<Id> seed_ids;
  /// IntegralLines: keep only seeds of this critical index (-1 keeps all).
  int seed_index = -1;
  algo::Direction direction = algo::Direction::Forward;
  /// GeometrySmoother and line-restricted ScalarFieldCriticalPoints: label of
  /// an earlier IntegralLines or GeometrySmoother step.
  std::string lines;
};

struct PipelineConfig {
  InputSpec input;
  int n_ranks = 1;
  comm::Backend backend = comm::Backend::Simulated;
  std::vector<Step> steps;
  std::string output_dir;
  bool timing = false;
  /// Input fields written to the output directory next to the step fields.
  std::vector<std::string> exports;
};

/// Line-oriented format:
///
///   # comment
///   input = random 16x16x16 seed=7 periodic
///   ranks = 4
///   backend = simulated
///   output = out
///   timing = on
///   export = f
///   step SFS1 ScalarFieldSmoother field=f iterations=10
///
/// Steps run in the order they appear.
PipelineConfig parse_config(const std::string& text);
PipelineConfig read_config(const std::string& path);

/// Step lists of the bundled pipelines, by name: preconditioning,
/// smoothing, gradient and integrated (the eight-step pipeline). They read
/// the fields `f` and `grad`.
const std::map<std::string, std::string>& bundled_pipelines();

/// Fields every generated grid or mesh carries.
std::vector<std::string> generated_fields();

/// Checks field references against the fields an input actually has.
void check_input_fields(const PipelineConfig& config, const std::vector<std::string>& input_fields);

}  // namespace ptopo::pipeline
