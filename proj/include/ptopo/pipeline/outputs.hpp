#pragma once

#include <map>
#include <string>
#include <vector>

#include "ptopo/pipeline/runner.hpp"

namespace ptopo::pipeline {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

/// Output files by name. Critical points, gradients and lines go to
/// `<label>.csv`, fields to `<label>.raw` (little-endian doubles in global
/// vertex id order).
std::map<std::string, std::string> render_outputs(const PipelineOutputs& outputs);

std::string report_json(const ProfilingReport& report);

/// Writes render_outputs() plus report.json into `dir`, creating it.
void write_outputs(const RunResult& result, const std::string& dir);

/// Per-rank block dump under `dir`/ranks: vertices (global id, owner, ghost
/// flag, position, fields), top cells (global id, owner, ghost flag, vertex
/// ids) and the ranks of the local adjacency graph.
void write_block_dump(const dist::GhostedBlock& block, const std::string& dir);

/// Compares two output directories. CSV files are compared as sorted line
/// sets without their owner_rank columns, which depend on the rank count;
/// other files byte for byte. report.json and the per-rank dumps are
/// skipped. Returns one message per difference.
std::vector<std::string> compare_output_dirs(const std::string& a, const std::string& b);

/// Same comparison on rendered outputs.
std::vector<std::string> compare_rendered(const std::map<std::string, std::string>& a,
                                          const std::map<std::string, std::string>& b);

}  // namespace ptopo::pipeline
