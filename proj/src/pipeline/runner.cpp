#include "ptopo/pipeline/runner.hpp"

#include <algorithm>
#include <tuple>

#include "ptopo/algo/order.hpp"
#include "ptopo/algo/scalar_fields.hpp"
#include "ptopo/comm/simulated.hpp"
#include "ptopo/dist/explicit_block.hpp"
#include "ptopo/dist/grid_block.hpp"
#include "ptopo/pipeline/outputs.hpp"
#include "ptopo/pipeline/timing.hpp"

namespace ptopo::pipeline {

namespace {

const std::vector<std::string>& table_names() {
  static const std::vector<std::string> names = {"edges",        "triangles",        "tetrahedra", "vertex_stars",
                                                 "vertex_neighbors", "cofacets", "boundary"};
  return names;
}

/// Block categories, then one entry per triangulation table, then anything
/// counted by total_builds() but not listed.
const std::vector<std::string>& build_categories() {
  namespace c = dist::category;
  static const std::vector<std::string> all = [] {
    std::vector<std::string> v = {c::kGhostLayer,       c::kLag,      c::kTriangulation,
                                  c::kGlobalIds,        c::kRankMaps, c::kIntermediateIds,
                                  c::kBoundary,         c::kGhostExchange, c::kPeriodic};
    for (const auto& t : table_names()) v.push_back("table_" + t);
    v.push_back("other");
    return v;
  }();
  return all;
}

std::vector<int> build_snapshot(const dist::GhostedBlock& b) {
  std::vector<int> out;
  int listed = 0;
  auto tables = b.table_builds();
  for (const auto& cat : build_categories()) {
    int n = 0;
    if (cat.rfind("table_", 0) == 0) {
      auto it = tables.find(cat.substr(6));
      if (it != tables.end()) n = it->second;
    } else if (auto it = b.builds().find(cat); it != b.builds().end()) {
      n = it->second;
    }
    listed += n;
    out.push_back(n);
  }
  out.back() = b.total_builds() - listed;
  return out;
}

/// Difference of two snapshots summed over ranks (collective).
std::map<std::string, int> summed_delta(comm::Communicator& comm, const std::vector<int>& before,
                                        const std::vector<int>& after) {
  std::vector<int> delta(before.size());
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = after[i] - before[i];
  auto all = comm.allgatherv(delta);
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    int sum = 0;
    for (auto& r : all) sum += r[i];
    if (sum) out[build_categories()[i]] = sum;
  }
  return out;
}

class Runner {
 public:
  Runner(comm::Communicator& comm, const PipelineConfig& config, const Dataset& data, RankState& state)
      : comm_(comm), config_(config), data_(data), state_(state) {}

  RunResult run() {
    setup();
    auto& block = *state_.block;
    result_.report.total_seconds = timed(comm_, config_.timing, [&] {
      for (const auto& step : config_.steps) {
        StepReport rep;
        rep.label = step.label;
        rep.algorithm = to_string(step.algorithm);
        auto before = build_snapshot(block);
        try {
          execute(step, rep);
        } catch (const comm::WorldAborted&) {
          throw;
        } catch (const std::exception& e) {
          throw std::runtime_error("step " + step.label + " (" + rep.algorithm + "): " + e.what());
        }
        rep.builds = summed_delta(comm_, before, build_snapshot(block));
        result_.report.steps.push_back(std::move(rep));
      }
    });
    try {
      gather_outputs();
    } catch (const comm::WorldAborted&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("gathering outputs: ") + e.what());
    }
    if (!config_.output_dir.empty()) {
      write_block_dump(block, config_.output_dir);
      if (comm_.rank() == 0) write_outputs(result_, config_.output_dir);
    }
    if (comm_.rank() != 0) result_.outputs = {};
    return std::move(result_);
  }

 private:
  void setup() {
    auto& rep = result_.report;
    rep.ranks = comm_.size();
    rep.timing = config_.timing;
    if (state_.block) {
      state_.block->attach(comm_);
      state_.block->fields = state_.input_fields;
      rep.cached = true;
      return;
    }
    const int p = comm_.size(), r = comm_.rank();
    try {
      if (data_.is_grid) {
        dist::GridBlockInput in;
        rep.precondition_seconds[timer::kGhostLayer] =
            timed(comm_, config_.timing, [&] { in = dist::extract_grid_block(data_.grid, p, r); });
        rep.precondition_seconds[timer::kLag] = timed(comm_, config_.timing, [&] {
          state_.block = std::make_unique<dist::GridBlock>(comm_, std::move(in));
        });
      } else {
        dist::MeshBlockInput in;
        rep.precondition_seconds[timer::kGhostLayer] =
            timed(comm_, config_.timing, [&] { in = dist::extract_mesh_block(data_.mesh, p, r, true); });
        rep.precondition_seconds[timer::kLag] = timed(comm_, config_.timing, [&] {
          state_.block = std::make_unique<dist::ExplicitBlock>(comm_, std::move(in));
        });
      }
    } catch (const comm::WorldAborted&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("setup: ") + e.what());
    }
    state_.input_fields = state_.block->fields;
    std::vector<int> zero(build_categories().size(), 0);
    rep.setup_builds = summed_delta(comm_, zero, build_snapshot(*state_.block));
  }

  /// Runs gated preconditioning under a timer category.
  void precondition(const std::string& timer, StepReport& rep, const std::function<void()>& body) {
    double t = timed(comm_, config_.timing, body);
    result_.report.precondition_seconds[timer] += t;
    rep.precondition_seconds += t;
  }

  algo::OrderField order_of(const std::string& field) {
    auto it = orders_.find(field);
    if (it != orders_.end()) return it->second;
    return algo::compute_order(*state_.block, state_.block->field(field));
  }

  void execute(const Step& s, StepReport& rep) {
    auto& block = *state_.block;
    const bool t = config_.timing;
    using A = Algorithm;
    switch (s.algorithm) {
      case A::ScalarFieldSmoother: {
        precondition(timer::kExchangeLists, rep, [&] { block.require_exchange(0); });
        rep.seconds = timed(comm_, t, [&] {
          block.fields[s.label] = algo::smooth_scalar_field(block, block.field(s.field), s.iterations);
        });
        break;
      }
      case A::ScalarFieldNormalizer: {
        std::string warning;
        rep.seconds = timed(comm_, t, [&] {
          block.fields[s.label] = algo::normalize_scalar_field(block, block.field(s.field), &warning);
        });
        if (!warning.empty()) rep.warnings.push_back(warning);
        break;
      }
      case A::ArrayPreconditioning: {
        precondition(timer::kExchangeLists, rep, [&] { block.require_exchange(0); });
        rep.seconds = timed(comm_, t, [&] {
          const auto& f = block.field(s.field);
          auto order = algo::compute_order(block, f);
          algo::build_global_order(block, f, order);
          block.fields[s.label] = algo::order_as_field(order);
          orders_[s.label] = std::move(order);
        });
        break;
      }
      case A::ScalarFieldCriticalPoints: {
        if (!s.lines.empty()) {
          rep.seconds = timed(comm_, t, [&] {
            auto lines = lines_.at(s.lines);
            algo::sample_attribute(block, lines, block.field(s.field));
            auto assembled = algo::assemble_lines(comm_, lines);
            if (comm_.rank() == 0) result_.outputs.line_critical_points[s.label] = algo::line_critical_points(assembled);
          });
          break;
        }
        precondition(timer::kSimplexMaps, rep, [&] { block.require_boundary(); });
        rep.seconds = timed(comm_, t, [&] { points_[s.label] = algo::classify_critical_points(block, order_of(s.field)); });
        break;
      }
      case A::DiscreteGradient: {
        precondition(timer::kSimplexMaps, rep, [&] {
          for (int k = 1; k < block.dimension(); ++k) block.require_ids(k);
        });
        rep.seconds = timed(comm_, t, [&] { gradients_[s.label] = algo::compute_discrete_gradient(block, order_of(s.field)); });
        break;
      }
      case A::IntegralLines: {
        std::vector<Id> seeds = s.seed_ids;
        if (!s.seeds.empty()) {
          std::vector<Id> mine;
          for (const auto& cp : points_.at(s.seeds))
            if (s.seed_index < 0 || cp.index == s.seed_index) mine.push_back(cp.gid);
          for (auto& part : comm_.allgatherv(mine)) seeds.insert(seeds.end(), part.begin(), part.end());
          std::sort(seeds.begin(), seeds.end());
        }
        rep.seconds = timed(comm_, t, [&] {
          lines_[s.label] = algo::compute_integral_lines(block, order_of(s.field), seeds, s.direction);
        });
        break;
      }
      case A::GeometrySmoother: {
        rep.seconds = timed(comm_, t, [&] {
          auto lines = lines_.at(s.lines);
          algo::smooth_geometry(comm_, lines, s.iterations);
          lines_[s.label] = std::move(lines);
        });
        break;
      }
    }
    result_.outputs.order.push_back(s.label);
  }

  std::vector<double> gather_field(const std::vector<double>& f) {
    auto& block = *state_.block;
    std::vector<Id> gids;
    std::vector<double> values;
    for (Id v = 0; v < block.local_count(0); ++v) {
      if (block.is_ghost(0, v)) continue;
      gids.push_back(block.global_id(0, v));
      values.push_back(f[static_cast<std::size_t>(v)]);
    }
    auto all_gids = comm_.gatherv_to_root(gids);
    auto all_values = comm_.gatherv_to_root(values);
    std::vector<double> out;
    if (comm_.rank() != 0) return out;
    out.assign(data_.vertex_count(), 0.0);
    for (std::size_t r = 0; r < all_gids.size(); ++r)
      for (std::size_t i = 0; i < all_gids[r].size(); ++i) out.at(static_cast<std::size_t>(all_gids[r][i])) = all_values[r][i];
    return out;
  }

  template <class T> std::vector<T> gather_all(const std::vector<T>& mine) {
    std::vector<T> out;
    for (auto& part : comm_.gatherv_to_root(mine)) out.insert(out.end(), part.begin(), part.end());
    return out;
  }

  void gather_outputs() {
    auto& out = result_.outputs;
    auto& block = *state_.block;
    for (const auto& name : config_.exports) out.fields[name] = gather_field(block.field(name));
    for (const auto& s : config_.steps) {
      if (produces_field(s.algorithm)) {
        out.fields[s.label] = gather_field(block.field(s.label));
      } else if (auto it = points_.find(s.label); it != points_.end()) {
        auto all = gather_all(it->second);
        std::sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.gid < b.gid; });
        if (comm_.rank() == 0) out.critical_points[s.label] = std::move(all);
      } else if (auto g = gradients_.find(s.label); g != gradients_.end()) {
        algo::DiscreteGradient all;
        all.pairs = gather_all(g->second.pairs);
        all.critical = gather_all(g->second.critical);
        std::sort(all.pairs.begin(), all.pairs.end(),
                  [](auto& a, auto& b) { return std::tie(a.dim, a.facet) < std::tie(b.dim, b.facet); });
        std::sort(all.critical.begin(), all.critical.end(),
                  [](auto& a, auto& b) { return std::tie(a.dim, a.gid) < std::tie(b.dim, b.gid); });
        if (comm_.rank() == 0) out.gradients[s.label] = std::move(all);
      } else if (auto l = lines_.find(s.label); l != lines_.end()) {
        auto assembled = algo::assemble_lines(comm_, l->second);
        if (comm_.rank() == 0) out.lines[s.label] = std::move(assembled);
      }
    }
  }

  comm::Communicator& comm_;
  const PipelineConfig& config_;
  const Dataset& data_;
  RankState& state_;
  RunResult result_;
  std::map<std::string, algo::OrderField> orders_;
  std::map<std::string, std::vector<algo::CriticalPoint>> points_;
  std::map<std::string, algo::DiscreteGradient> gradients_;
  std::map<std::string, algo::LineSet> lines_;
};

}  // namespace

RunResult run_rank(comm::Communicator& comm, const PipelineConfig& config, const Dataset& data, RankState& state) {
  return Runner(comm, config, data, state).run();
}

Session::Session(PipelineConfig config, Dataset data) : config_(std::move(config)), data_(std::move(data)) {
  check_input_fields(config_, data_.field_names());
  for (int r = 0; r < config_.n_ranks; ++r) states_.push_back(std::make_unique<RankState>());
}

Session::Session(PipelineConfig config) : Session(config, load_dataset(config.input)) {}

RunResult Session::run() { return run(config_.steps); }

RunResult Session::run(const std::vector<Step>& steps) {
  if (config_.backend != comm::Backend::Simulated)
    throw std::invalid_argument("Session runs the simulated backend; use the launcher for tcp");
  PipelineConfig cfg = config_;
  cfg.steps = steps;
  check_input_fields(cfg, data_.field_names());
  auto results = comm::spawn_world<RunResult>(
      cfg.n_ranks, [&](comm::Communicator& c) { return run_rank(c, cfg, data_, *states_[c.rank()]); });
  return std::move(results[0]);
}

RunResult run_pipeline(const PipelineConfig& config) { return Session(config).run(); }

}  // namespace ptopo::pipeline
