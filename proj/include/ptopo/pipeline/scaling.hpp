#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ptopo/pipeline/config.hpp"

namespace ptopo::pipeline {

enum class ScalingMode { Strong, Weak };

/// One timed run of one step.
struct ScalingSample {
  std::string dataset;
  std::string step;
  int ranks = 1;
  double seconds = 0;
};

struct ScalingRow {
  std::string dataset;
  std::string step;
  int ranks = 1;
  double seconds = 0;
  /// t_1 / t_p.
  double speedup = 0;
  /// Strong mode: speedup / p * 100. Weak mode: t_1 / t_p * 100.
  double efficiency = 0;
};

double speedup(double t1, double tp);
double strong_efficiency(double t1, double tp, int p);
double weak_efficiency(double t1, double tp);

/// One row per sample, sorted by (dataset, step, ranks). Throws
/// std::invalid_argument when a (dataset, step) pair has no 1-rank sample.
std::vector<ScalingRow> scaling_report(const std::vector<ScalingSample>& samples, ScalingMode mode);

/// Grows a generated grid for a weak-scaling run at p ranks (p a power of
/// two): the sizes are doubled axis by axis, x first, once per factor of two.
InputSpec weak_scaled(const InputSpec& input, int p);

/// Short dataset name such as "random-16x16x16".
std::string dataset_label(const InputSpec& input);

/// Runs the pipeline with timing on the simulated backend at each rank count
/// and returns one sample per step, the fastest of `repetitions` runs. Each
/// run uses a fresh session.
std::vector<ScalingSample> measure_scaling(const PipelineConfig& config, const std::vector<int>& ranks,
                                           ScalingMode mode, int repetitions = 1);

std::string scaling_csv(const std::vector<ScalingRow>& rows, ScalingMode mode);

}  // namespace ptopo::pipeline
