#include "ptopo/pipeline/scaling.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "ptopo/pipeline/outputs.hpp"
#include "ptopo/pipeline/runner.hpp"

namespace ptopo::pipeline {

double speedup(double t1, double tp) { return t1 / tp; }
double strong_efficiency(double t1, double tp, int p) { return speedup(t1, tp) / p * 100.0; }
double weak_efficiency(double t1, double tp) { return t1 / tp * 100.0; }

std::vector<ScalingRow> scaling_report(const std::vector<ScalingSample>& samples, ScalingMode mode) {
  std::map<std::pair<std::string, std::string>, double> baseline;
  for (const auto& s : samples) {
    if (s.seconds < 0) throw std::invalid_argument("negative time for " + s.dataset + "/" + s.step);
    if (s.ranks == 1) baseline[{s.dataset, s.step}] = s.seconds;
  }
  std::vector<ScalingRow> rows;
  for (const auto& s : samples) {
    auto it = baseline.find({s.dataset, s.step});
    if (it == baseline.end()) throw std::invalid_argument("no 1-rank baseline for " + s.dataset + "/" + s.step);
    ScalingRow r{s.dataset, s.step, s.ranks, s.seconds, speedup(it->second, s.seconds), 0};
    r.efficiency = mode == ScalingMode::Strong ? strong_efficiency(it->second, s.seconds, s.ranks)
                                               : weak_efficiency(it->second, s.seconds);
    rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ScalingRow& a, const ScalingRow& b) {
    return std::tie(a.dataset, a.step, a.ranks) < std::tie(b.dataset, b.step, b.ranks);
  });
  return rows;
}

InputSpec weak_scaled(const InputSpec& input, int p) {
  if (!input.generated_grid()) throw std::invalid_argument("weak scaling needs a generated grid input");
  if (p < 1 || (p & (p - 1)) != 0) throw std::invalid_argument("weak scaling needs a power-of-two rank count");
  InputSpec out = input;
  int axes = out.dims[2] > 1 ? 3 : 2;
  for (int i = 0; (1 << i) < p; ++i) out.dims[i % axes] *= 2;
  return out;
}

std::string dataset_label(const InputSpec& input) {
  if (!input.generated()) return input.path;
  std::string out = input.kind;
  if (input.generated_grid()) {
    out += '-' + std::to_string(input.dims[0]) + 'x' + std::to_string(input.dims[1]) + 'x' + std::to_string(input.dims[2]);
    if (input.periodic) out += "-periodic";
  }
  return out;
}

std::vector<ScalingSample> measure_scaling(const PipelineConfig& config, const std::vector<int>& ranks,
                                           ScalingMode mode, int repetitions) {
  std::vector<ScalingSample> out;
  const auto name = dataset_label(config.input);
  for (int p : ranks) {
    PipelineConfig c = config;
    c.n_ranks = p;
    c.timing = true;
    c.output_dir.clear();
    c.backend = comm::Backend::Simulated;
    if (mode == ScalingMode::Weak) c.input = weak_scaled(config.input, p);
    std::map<std::string, double> best;
    for (int rep = 0; rep < std::max(1, repetitions); ++rep) {
      auto result = run_pipeline(c);
      for (const auto& s : result.report.steps) {
        auto it = best.find(s.label);
        if (it == best.end() || s.seconds < it->second) best[s.label] = s.seconds;
      }
    }
    for (const auto& s : c.steps) out.push_back({name, s.label, p, best.at(s.label)});
  }
  return out;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows, ScalingMode mode) {
  std::ostringstream os;
  os << "dataset,step,ranks,seconds,speedup," << (mode == ScalingMode::Strong ? "strong" : "weak") << "_efficiency\n";
  for (const auto& r : rows)
    os << r.dataset << ',' << r.step << ',' << r.ranks << ',' << format_double(r.seconds) << ','
       << format_double(r.speedup) << ',' << format_double(r.efficiency) << '\n';
  return os.str();
}

}  // namespace ptopo::pipeline
