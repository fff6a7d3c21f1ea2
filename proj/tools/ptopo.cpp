#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ptopo/comm/simulated.hpp"
#include "ptopo/comm/tcp.hpp"
#include "ptopo/pipeline/config.hpp"
#include "ptopo/pipeline/outputs.hpp"
#include "ptopo/pipeline/runner.hpp"
#include "ptopo/pipeline/scaling.hpp"
#include "ptopo/pipeline/timing.hpp"

using namespace ptopo;
using namespace ptopo::pipeline;

namespace {

void print_summary(const RunResult& r, std::ostream& os) {
  const auto& rep = r.report;
  os << "ranks: " << rep.ranks << (rep.cached ? " (cached blocks)" : "") << "\n";
  if (rep.timing) {
    os << "total: " << format_double(rep.total_seconds) << " s\n";
    for (const auto& [cat, t] : rep.precondition_seconds) os << "  precondition " << cat << ": " << format_double(t) << " s\n";
  }
  for (const auto& s : rep.steps) {
    os << s.label << " (" << s.algorithm << ")";
    if (rep.timing) os << " " << format_double(s.seconds) << " s";
    if (!s.builds.empty()) {
      os << " built:";
      for (const auto& [cat, n] : s.builds) os << " " << cat << "=" << n;
    }
    os << "\n";
    for (const auto& w : s.warnings) os << "  warning: " << w << "\n";
  }
  const auto& o = r.outputs;
  for (const auto& [name, cps] : o.critical_points) {
    std::array<int, 4> count{};
    for (const auto& c : cps) ++count[static_cast<std::size_t>(c.index)];
    os << name << ": " << cps.size() << " critical points (" << count[0] << " min, " << count[1] << " 1-saddle, "
       << count[2] << " 2-saddle, " << count[3] << " max by index)\n";
  }
  for (const auto& [name, g] : o.gradients) {
    auto c = g.critical_counts();
    os << name << ": critical simplices " << c[0] << " " << c[1] << " " << c[2] << " " << c[3] << ", " << g.pairs.size()
       << " pairs\n";
  }
  for (const auto& [name, lines] : o.lines) os << name << ": " << lines.size() << " lines\n";
  for (const auto& [name, pts] : o.line_critical_points) os << name << ": " << pts.size() << " extrema along lines\n";
}

/// Starts `n` copies of this executable with the tcp environment set and
/// waits for all of them. Returns the number of failed processes.
int launch(int n, const std::vector<std::string>& args) {
  auto ports = comm::pick_free_ports(n);
  std::string peers;
  for (int r = 0; r < n; ++r) peers += (r ? "," : "") + std::string("127.0.0.1:") + std::to_string(ports[r]);
  std::vector<pid_t> children;
  for (int r = 0; r < n; ++r) {
    pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
      setenv("PTOPO_RANK", std::to_string(r).c_str(), 1);
      setenv("PTOPO_NRANKS", std::to_string(n).c_str(), 1);
      setenv("PTOPO_PEERS", peers.c_str(), 1);
      std::vector<std::string> owned = {"ptopo"};
      owned.insert(owned.end(), args.begin(), args.end());
      std::vector<char*> argv;
      for (auto& a : owned) argv.push_back(a.data());
      argv.push_back(nullptr);
      execv("/proc/self/exe", argv.data());
      std::perror("execv");
      _exit(127);
    }
    children.push_back(pid);
  }
  int failed = 0;
  for (pid_t pid : children) {
    int status = 0;
    waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) ++failed;
  }
  return failed;
}

int run_command(const std::string& path, int ranks, const std::string& output, bool timing) {
  auto config = read_config(path);
  if (ranks > 0) config.n_ranks = ranks;
  if (!output.empty()) config.output_dir = output;
  config.timing = config.timing || timing || timing_enabled_from_env();

  if (auto tcp = comm::tcp_config_from_env()) {
    comm::TcpCommunicator comm(*tcp);
    config.n_ranks = comm.size();
    auto data = load_dataset(config.input);
    check_input_fields(config, data.field_names());
    RankState state;
    auto result = run_rank(comm, config, data, state);
    if (comm.rank() == 0) print_summary(result, std::cout);
    return 0;
  }
  if (config.backend == comm::Backend::Tcp) {
    std::vector<std::string> args = {"run", path, "--ranks", std::to_string(config.n_ranks)};
    if (!config.output_dir.empty()) args.insert(args.end(), {"--output", config.output_dir});
    if (config.timing) args.push_back("--timing");
    int failed = launch(config.n_ranks, args);
    if (failed) std::cerr << failed << " rank process(es) failed\n";
    return failed ? 1 : 0;
  }
  Session session(config);
  auto result = session.run();
  print_summary(result, std::cout);
  if (!config.output_dir.empty()) std::cout << "outputs written to " << config.output_dir << "\n";
  return 0;
}

int generate_command(const std::string& dataset, const std::string& dims, const std::string& out, std::uint64_t seed,
                     bool periodic) {
  std::string spec = dataset;
  InputSpec probe;
  probe.kind = dataset;
  if (probe.generated_grid()) spec += " " + dims;
  spec += " seed=" + std::to_string(seed);
  if (periodic) spec += " periodic";
  auto config = parse_config("input = " + spec + "\n");
  if (!config.input.generated()) throw std::invalid_argument("generate: '" + dataset + "' is not a generated dataset");
  auto data = load_dataset(config.input);
  if (data.is_grid) {
    write_grid(out, data.grid);
    std::cout << "wrote grid " << dims << " to " << out << "\n";
  } else {
    write_mesh(out, data.mesh);
    std::cout << "wrote mesh with " << data.mesh.cells.size() << " cells to " << out << "\n";
  }
  return 0;
}

int bench_command(const std::string& path, const std::string& ranks_list, bool weak, int repeat,
                  const std::string& out) {
  auto config = read_config(path);
  std::vector<int> ranks;
  std::stringstream ss(ranks_list);
  for (std::string item; std::getline(ss, item, ',');) ranks.push_back(std::stoi(item));
  auto mode = weak ? ScalingMode::Weak : ScalingMode::Strong;
  auto rows = scaling_report(measure_scaling(config, ranks, mode, repeat), mode);
  auto csv = scaling_csv(rows, mode);
  std::cout << csv;
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed topological data analysis pipelines"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a pipeline config");
  std::string config_path, output;
  int ranks = 0;
  bool timing = false;
  run->add_option("config", config_path, "Pipeline config file")->required()->check(CLI::ExistingFile);
  run->add_option("--ranks", ranks, "Override the rank count");
  run->add_option("--output", output, "Override the output directory");
  run->add_flag("--timing", timing, "Barrier-bracketed timing (also PTOPO_TIMING=1)");

  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  std::string dataset, dims = "-", out;
  std::uint64_t seed = 1;
  bool periodic = false;
  gen->add_option("dataset", dataset, "elevation, random, wavelet, two_triangles or kuhn_cube")->required();
  gen->add_option("dims", dims, "Grid sizes such as 16x16x16 (ignored for meshes)")->required();
  gen->add_option("out", out, "Grid header or mesh file to write")->required();
  gen->add_option("--seed", seed, "Seed of the random fields");
  gen->add_flag("--periodic", periodic, "Periodic grid");

  auto* cmp = app.add_subcommand("compare", "Compare two output directories after sorting");
  std::string dir_a, dir_b;
  cmp->add_option("a", dir_a)->required()->check(CLI::ExistingDirectory);
  cmp->add_option("b", dir_b)->required()->check(CLI::ExistingDirectory);

  auto* bench = app.add_subcommand("bench", "Time a pipeline at several rank counts");
  std::string bench_ranks = "1,2,4,8", bench_out;
  bool weak = false, bench_timing = true;
  int repeat = 1;
  bench->add_option("config", config_path, "Pipeline config file")->required()->check(CLI::ExistingFile);
  bench->add_option("--ranks", bench_ranks, "Comma separated rank counts");
  bench->add_flag("--timing", bench_timing, "Accepted for symmetry with run; bench always times");
  bench->add_flag("--weak", weak, "Grow the generated grid with the rank count");
  bench->add_option("--repeat", repeat, "Keep the fastest of this many runs");
  bench->add_option("--output", bench_out, "Also write the table to this CSV file");

  auto* lnch = app.add_subcommand("launch", "Run a subcommand as N tcp-connected processes");
  int nprocs = 2;
  std::vector<std::string> rest;
  lnch->add_option("-n,--nprocs", nprocs, "Number of processes")->check(CLI::PositiveNumber);
  lnch->add_option("command", rest, "Subcommand and arguments, after --")->required();

  auto* list = app.add_subcommand("pipelines", "Print the bundled pipelines");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return run_command(config_path, ranks, output, timing);
    if (gen->parsed()) return generate_command(dataset, dims, out, seed, periodic);
    if (cmp->parsed()) {
      auto diffs = compare_output_dirs(dir_a, dir_b);
      for (const auto& d : diffs) std::cout << d << "\n";
      std::cout << (diffs.empty() ? "identical" : "different") << "\n";
      return diffs.empty() ? 0 : 1;
    }
    if (bench->parsed()) return bench_command(config_path, bench_ranks, weak, repeat, bench_out);
    if (lnch->parsed()) return launch(nprocs, rest) ? 1 : 0;
    if (list->parsed()) {
      for (const auto& [name, steps] : bundled_pipelines()) std::cout << "# " << name << "\n" << steps << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
