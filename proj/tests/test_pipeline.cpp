#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "ptopo/comm/simulated.hpp"
#include "ptopo/pipeline/config.hpp"
#include "ptopo/pipeline/outputs.hpp"
#include "ptopo/pipeline/runner.hpp"
#include "ptopo/pipeline/scaling.hpp"
#include "ptopo/pipeline/timing.hpp"

using namespace ptopo;
using namespace ptopo::pipeline;
namespace fs = std::filesystem;

namespace {

PipelineConfig config_for(const std::string& input, int ranks, const std::string& steps) {
  return parse_config("input = " + input + "\nranks = " + std::to_string(ranks) + "\n" + steps);
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("ptopo_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("minimal config") {
  auto c = parse_config("input = elevation 8x8x8\nstep N ScalarFieldNormalizer field=f\n");
  CHECK(c.input.kind == "elevation");
  CHECK(c.input.dims == Coords{8, 8, 8});
  CHECK(c.n_ranks == 1);
  REQUIRE(c.steps.size() == 1);
  CHECK(c.steps[0].algorithm == Algorithm::ScalarFieldNormalizer);
  CHECK(c.steps[0].field == "f");
  CHECK_FALSE(c.timing);
}

TEST_CASE("the integrated pipeline parses into eight steps with resolved field routing") {
  auto c = config_for("random 16x16x16 seed=3", 4, bundled_pipelines().at("integrated"));
  REQUIRE(c.steps.size() == 8);
  std::vector<std::string> labels, inputs;
  for (auto& s : c.steps) {
    labels.push_back(s.label);
    inputs.push_back(s.field.empty() ? s.lines : s.field);
  }
  CHECK(labels == std::vector<std::string>{"SFS1", "SFS2", "SFN1", "AP", "SFCP1", "IL", "GS", "SFCP2"});
  CHECK(inputs == std::vector<std::string>{"f", "grad", "SFS1", "SFN1", "AP", "AP", "IL", "SFS2"});
  CHECK(c.steps[5].seeds == "SFCP1");
  CHECK(c.steps[7].lines == "GS");
  CHECK(c.n_ranks == 4);
}

TEST_CASE("config errors name the line and the step") {
  auto e = error_of("input = elevation 8x8x8\nstep IL IntegralLines field=f seeds=CP\n");
  CHECK(e.find("line 2") != std::string::npos);
  CHECK(e.find("step IL") != std::string::npos);
  CHECK(e.find("CP") != std::string::npos);

  CHECK(error_of("input = elevation 8x8x8\n\nstep X Contour field=f\n").find("line 3: unknown algorithm") == 0);
  CHECK(error_of("input = elevation 8x8x8\nstep S ScalarFieldSmoother field=g\n").find("unknown field 'g'") !=
        std::string::npos);
  CHECK(error_of("input = random 8x8\nstep S ScalarFieldSmoother field=f iterations=-1\n").find("line 2") == 0);
  CHECK(error_of("input = random 8x8\nstep C ScalarFieldCriticalPoints field=f\nstep N ScalarFieldNormalizer field=C\n")
            .find("not a field") != std::string::npos);
  CHECK(error_of("input = random 8x8\ncolour = red\n").find("line 2: unknown key") == 0);
  CHECK(error_of("ranks = 2\n").find("missing 'input'") != std::string::npos);
  CHECK(error_of("input = random 8x8\nstep A ArrayPreconditioning field=f\nstep A ArrayPreconditioning field=f\n")
            .find("duplicate") != std::string::npos);
  CHECK(error_of("input = random 8x8\nstep G GeometrySmoother lines=A\n").find("step G") != std::string::npos);
  CHECK(error_of("input = random 4x4 periodic explicit\n").find("line 1") == 0);
}

TEST_CASE("file inputs are checked against their fields when loaded") {
  auto dir = scratch("file_input");
  fs::create_directories(dir);
  auto g = make_grid_dataset("random", {4, 4, 1}, false, 1);
  g.fields.erase("grad");
  write_grid((dir / "g.hdr").string(), g);
  std::ofstream(dir / "a.cfg") << "input = grid g.hdr\nstep S ScalarFieldSmoother field=grad\n";
  auto c = read_config((dir / "a.cfg").string());
  CHECK(c.input.path == (dir / "g.hdr").string());
  CHECK_THROWS_WITH_AS(Session{c}, doctest::Contains("step S"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("elevation critical points agree between 1 and 4 ranks") {
  auto steps = bundled_pipelines().at("preconditioning");
  auto one = run_pipeline(config_for("elevation 8x8x8", 1, steps));
  auto four = run_pipeline(config_for("elevation 8x8x8", 4, steps));
  auto a = render_outputs(one.outputs), b = render_outputs(four.outputs);
  CHECK(compare_rendered(a, b).empty());
  auto rows = data_lines(a.at("SFCP1.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].rfind("0,0,0,1,0,0,0,", 0) == 0);
  CHECK(rows[1].rfind("511,3,0,1,7,7,7,", 0) == 0);
  CHECK(data_lines(b.at("SFCP1.csv")).size() == 2);
}

TEST_CASE("smoothing and normalization at 2 ranks equal the 1-rank run bitwise") {
  auto steps = bundled_pipelines().at("smoothing");
  auto one = run_pipeline(config_for("random 16x16x16 seed=11", 1, steps));
  auto two = run_pipeline(config_for("random 16x16x16 seed=11", 2, steps));
  const auto& a = one.outputs.fields.at("SFN");
  const auto& b = two.outputs.fields.at("SFN");
  REQUIRE(a.size() == 4096);
  REQUIRE(b.size() == a.size());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("a second run on a cached session does no preconditioning") {
  auto c = config_for("random 8x8x8 seed=2", 4,
                      "step S ScalarFieldSmoother field=f iterations=2\n"
                      "step N ScalarFieldNormalizer field=S\n"
                      "step A ArrayPreconditioning field=N\n"
                      "step C ScalarFieldCriticalPoints field=A\n"
                      "step D DiscreteGradient field=A\n");
  Session s(c);
  auto first = s.run();
  CHECK_FALSE(first.report.cached);
  CHECK_FALSE(first.report.setup_builds.empty());
  std::map<std::string, int> steps_building;
  for (auto& step : first.report.steps)
    for (auto& [cat, n] : step.builds) ++steps_building[cat];
  for (auto& [cat, n] : steps_building) CHECK_MESSAGE(n == 1, cat);
  CHECK(first.report.steps[2].builds.empty());

  auto second = s.run();
  CHECK(second.report.cached);
  CHECK(second.report.setup_builds.empty());
  for (auto& step : second.report.steps) CHECK_MESSAGE(step.builds.empty(), step.label);
  CHECK(compare_rendered(render_outputs(first.outputs), render_outputs(second.outputs)).empty());
}

TEST_CASE("a failing step reports rank and step") {
  Dataset d;
  d.grid = make_grid_dataset("random", {4, 4, 4}, false, 5);
  d.grid.fields["f"][37] = std::numeric_limits<double>::quiet_NaN();
  Session s(config_for("random 4x4x4", 2, "step AP ArrayPreconditioning field=f\n"), d);
  try {
    s.run();
    FAIL("expected an error");
  } catch (const comm::WorldError& e) {
    CHECK(std::string(e.what()).find("step AP (ArrayPreconditioning)") != std::string::npos);
    CHECK(std::string(e.what()).rfind("rank ", 0) == 0);
  }
}

TEST_CASE("timed regions") {
  comm::spawn_world(3, [](comm::Communicator& c) {
    double t = timed(c, true, [] {});
    CHECK(t >= 0);
    CHECK(t < 1.0);
    t = timed(c, true, [&] {
      if (c.rank() == 2) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    });
    if (c.rank() == 0) CHECK(t >= 0.05);
    auto barriers = c.barrier_count();
    timed(c, false, [] {});
    CHECK(c.barrier_count() == barriers);
  });
}

TEST_CASE("disabled timing injects no barriers into a pipeline run") {
  auto steps = bundled_pipelines().at("integrated");
  auto quiet = config_for("random 6x6x6 seed=4", 2, steps);
  auto timedc = quiet;
  timedc.timing = true;
  auto count = [](const PipelineConfig& c) {
    Session s(c);
    auto data = s.dataset();
    RankState states[2];
    auto per_rank = comm::spawn_world<std::uint64_t>(2, [&](comm::Communicator& comm) {
      run_rank(comm, c, data, states[comm.rank()]);
      return comm.barrier_count();
    });
    return per_rank[0];
  };
  CHECK(count(quiet) == 0);
  CHECK(count(timedc) > 0);
}

TEST_CASE("output files") {
  SUBCASE("an empty critical point set gives a header-only CSV") {
    PipelineOutputs o;
    o.critical_points["C"] = {};
    CHECK(render_outputs(o).at("C.csv") == "global_vertex_id,index,degenerate,boundary,x,y,z,owner_rank\n");
  }
  SUBCASE("an identity pipeline reproduces the input field") {
    auto dir = scratch("identity");
    auto c = config_for("wavelet 6x5x4", 1, "export = f\nstep S ScalarFieldSmoother field=f iterations=0\n");
    c.output_dir = dir.string();
    Session s(c);
    s.run();
    const auto& f = s.dataset().grid.fields.at("f");
    std::string expected(reinterpret_cast<const char*>(f.data()), f.size() * sizeof(double));
    CHECK(slurp(dir / "S.raw") == expected);
    CHECK(slurp(dir / "f.raw") == expected);
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "ranks" / "rank0_vertices.csv"));
    fs::remove_all(dir);
  }
  SUBCASE("the reassembled smoother field at 4 ranks equals the 1-rank file") {
    auto a = scratch("smooth1"), b = scratch("smooth4");
    auto steps = bundled_pipelines().at("smoothing");
    auto c1 = config_for("random 10x9x8 seed=8", 1, steps);
    auto c4 = config_for("random 10x9x8 seed=8", 4, steps);
    c1.output_dir = a.string();
    c4.output_dir = b.string();
    run_pipeline(c1);
    run_pipeline(c4);
    CHECK(slurp(a / "SFS.raw") == slurp(b / "SFS.raw"));
    CHECK(slurp(a / "SFS.raw").size() == 720 * sizeof(double));
    CHECK(compare_output_dirs(a.string(), b.string()).empty());
    for (int r = 0; r < 4; ++r) {
      auto verts = slurp(b / "ranks" / ("rank" + std::to_string(r) + "_vertices.csv"));
      CHECK(verts.rfind("local_id,global_id,owner_rank,ghost,x,y,z,SFN,SFS,f,grad\n", 0) == 0);
      CHECK(fs::exists(b / "ranks" / ("rank" + std::to_string(r) + "_lag.csv")));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
  SUBCASE("compare reports differences") {
    std::map<std::string, std::string> x{{"a.csv", "h\n1\n2\n"}, {"f.raw", "ab"}};
    auto y = x;
    y["a.csv"] = "h\n2\n1\n";
    CHECK(compare_rendered(x, y).empty());
    y["a.csv"] = "h\n2\n3\n";
    y["f.raw"] = "ba";
    CHECK(compare_rendered(x, y).size() == 2);
    y.erase("f.raw");
    CHECK(compare_rendered(x, y).size() == 2);
  }
}

TEST_CASE("bundled meshes run every pipeline") {
  for (const char* input : {"two_triangles", "kuhn_cube"})
    for (auto& [name, steps] : bundled_pipelines()) {
      auto one = run_pipeline(config_for(input, 1, steps));
      auto eight = run_pipeline(config_for(input, 8, steps));
      CHECK_MESSAGE(compare_rendered(render_outputs(one.outputs), render_outputs(eight.outputs)).empty(),
                    input << " " << name);
    }
}

TEST_CASE("scaling formulas") {
  CHECK(speedup(8, 2) == 4);
  CHECK(strong_efficiency(8, 2, 4) == 100);
  CHECK(weak_efficiency(3, 3) == 100);
  auto rows = scaling_report({{"d", "S", 4, 2}, {"d", "S", 1, 8}}, ScalingMode::Strong);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].ranks == 1);
  CHECK(rows[1].speedup == 4);
  CHECK(rows[1].efficiency == 100);
  CHECK_THROWS_AS(scaling_report({{"d", "S", 2, 1}}, ScalingMode::Strong), std::invalid_argument);
  auto weak = scaling_report({{"d", "S", 1, 5}, {"d", "S", 2, 5}}, ScalingMode::Weak);
  CHECK(weak[1].efficiency == 100);
  CHECK(weak_scaled(parse_config("input = random 4x4x4\n").input, 8).dims == Coords{8, 8, 8});
  CHECK(weak_scaled(parse_config("input = random 4x4\n").input, 4).dims == Coords{8, 8, 1});
}

TEST_CASE("scaling report for the communication-free algorithms on a 32^3 grid") {
  auto c = config_for("random 32x32x32 seed=1", 1,
                      "step SFCP ScalarFieldCriticalPoints field=f\nstep DG DiscreteGradient field=f\n");
  auto samples = measure_scaling(c, {1, 2, 4, 8}, ScalingMode::Strong);
  auto rows = scaling_report(samples, ScalingMode::Strong);
  REQUIRE(rows.size() == 8);
  auto csv = scaling_csv(rows, ScalingMode::Strong);
  auto lines = data_lines(csv);
  CHECK(csv.rfind("dataset,step,ranks,seconds,speedup,strong_efficiency\n", 0) == 0);
  REQUIRE(lines.size() == 8);
  for (auto& r : rows) {
    CHECK(r.dataset == "random-32x32x32");
    CHECK(r.seconds > 0);
    CHECK(std::isfinite(r.efficiency));
  }
  CHECK(rows[0].speedup == 1);
}
