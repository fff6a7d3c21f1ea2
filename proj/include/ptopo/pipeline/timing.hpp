#pragma once

#include <functional>

#include "ptopo/comm/communicator.hpp"

namespace ptopo::pipeline {

/// True when PTOPO_TIMING is set to a non-empty value other than "0".
bool timing_enabled_from_env();

/// Runs `body` and returns its wall time in seconds (collective when
/// enabled). With `enabled` the region is bracketed by a barrier on each
/// side, so every rank measures the slowest rank; rank 0's value is the one
/// reported. Without it no barrier is issued and the local time is returned.
double timed(comm::Communicator& comm, bool enabled, const std::function<void()>& body);

}  // namespace ptopo::pipeline
