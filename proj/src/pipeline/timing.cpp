#include "ptopo/pipeline/timing.hpp"

#include <chrono>
#include <cstdlib>
#include <string>

namespace ptopo::pipeline {

bool timing_enabled_from_env() {
  const char* v = std::getenv("PTOPO_TIMING");
  return v && *v && std::string(v) != "0";
}

double timed(comm::Communicator& comm, bool enabled, const std::function<void()>& body) {
  using clock = std::chrono::steady_clock;
  if (enabled) comm.barrier();
  auto start = clock::now();
  body();
  if (enabled) comm.barrier();
  return std::chrono::duration<double>(clock::now() - start).count();
}

}  // namespace ptopo::pipeline
