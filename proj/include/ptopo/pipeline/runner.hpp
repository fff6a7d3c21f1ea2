#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ptopo/algo/critical_points.hpp"
#include "ptopo/algo/discrete_gradient.hpp"
#include "ptopo/algo/integral_lines.hpp"
#include "ptopo/dist/ghosted_block.hpp"
#include "ptopo/pipeline/config.hpp"
#include "ptopo/pipeline/datasets.hpp"

namespace ptopo::pipeline {

/// Preconditioning categories timed by the runner.
namespace timer {
inline const std::string kGhostLayer = "ghost_layer";
inline const std::string kLag = "lag_and_global_ids";
inline const std::string kSimplexMaps = "simplex_maps";
inline const std::string kExchangeLists = "ghost_exchange_lists";
}  // namespace timer

struct StepReport {
  std::string label;
  std::string algorithm;
  /// Algorithm time, rank 0's measurement.
  double seconds = 0;
  /// Time spent in the step's preconditioning, rank 0's measurement.
  double precondition_seconds = 0;
  /// Preconditioning work done during this step, summed over ranks, per
  /// category. Categories that did no work are omitted.
  std::map<std::string, int> builds;
  std::vector<std::string> warnings;
};

struct ProfilingReport {
  int ranks = 1;
  bool timing = false;
  /// True when the blocks came from an earlier run of the same session.
  bool cached = false;
  std::map<std::string, double> precondition_seconds;
  /// Work done while building the blocks, summed over ranks, per category.
  std::map<std::string, int> setup_builds;
  std::vector<StepReport> steps;
  double total_seconds = 0;
};

/// Everything a run produces, gathered at rank 0 and ordered by global id.
struct PipelineOutputs {
  /// Field steps and exported input fields, indexed by global vertex id.
  std::map<std::string, std::vector<double>> fields;
  std::map<std::string, std::vector<algo::CriticalPoint>> critical_points;
  std::map<std::string, std::vector<algo::LineCriticalPoint>> line_critical_points;
  std::map<std::string, algo::DiscreteGradient> gradients;
  std::map<std::string, std::vector<algo::IntegralLine>> lines;
  /// Step labels in pipeline order.
  std::vector<std::string> order;
};

struct RunResult {
  PipelineOutputs outputs;
  ProfilingReport report;
};

/// Per-rank state that outlives a run: the ghosted block with its cached
/// preconditioning and the untouched input fields.
struct RankState {
  std::unique_ptr<dist::GhostedBlock> block;
  std::map<std::string, std::vector<double>> input_fields;
};

/// Runs the pipeline on one rank (collective over `comm`). Builds the block
/// on first use and reuses it afterwards. Outputs are only filled on rank 0.
/// Errors are rethrown with the step label attached.
RunResult run_rank(comm::Communicator& comm, const PipelineConfig& config, const Dataset& data, RankState& state);

/// A dataset plus one cached block per rank, reused by every run on the
/// simulated backend.
class Session {
 public:
  Session(PipelineConfig config, Dataset data);
  explicit Session(PipelineConfig config);

  /// Spawns a simulated world and runs the pipeline; writes the outputs when
  /// the config names an output directory.
  RunResult run();
  /// Same session, different steps.
  RunResult run(const std::vector<Step>& steps);

  const PipelineConfig& config() const { return config_; }
  const Dataset& dataset() const { return data_; }
  const RankState& rank_state(int r) const { return *states_[static_cast<std::size_t>(r)]; }

 private:
  PipelineConfig config_;
  Dataset data_;
  std::vector<std::unique_ptr<RankState>> states_;
};

/// One-shot run on a fresh session.
RunResult run_pipeline(const PipelineConfig& config);

}  // namespace ptopo::pipeline
