#pragma once

#include <string>
#include <vector>

#include "ptopo/algo/order.hpp"

namespace ptopo::algo {

/// Rescales to [0, 1] with the global min/max of the owned vertices
/// (collective). A constant field maps to zeros and sets `warning`.
std::vector<double> normalize_scalar_field(dist::GhostedBlock& block, const std::vector<double>& f,
                                           std::string* warning = nullptr);

/// Jacobi averaging over the closed vertex star, `iterations` times, with a
/// ghost exchange after every iteration (collective). Terms are summed in
/// ascending global id order.
std::vector<double> smooth_scalar_field(dist::GhostedBlock& block, std::vector<double> f, int iterations);

}  // namespace ptopo::algo
