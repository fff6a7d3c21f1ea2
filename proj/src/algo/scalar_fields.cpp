#include "ptopo/algo/scalar_fields.hpp"

#include <algorithm>
#include <limits>

namespace ptopo::algo {

std::vector<double> normalize_scalar_field(dist::GhostedBlock& block, const std::vector<double>& f,
                                           std::string* warning) {
  if (static_cast<Id>(f.size()) != block.local_count(0))
    throw AlgorithmError("normalizer: field size does not match the number of local vertices");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Id v = 0; v < block.local_count(0); ++v) {
    if (block.is_ghost(0, v)) continue;
    lo = std::min(lo, f[static_cast<std::size_t>(v)]);
    hi = std::max(hi, f[static_cast<std::size_t>(v)]);
  }
  auto& comm = block.comm();
  lo = comm.allreduce(lo, comm::ReduceOp::Min);
  hi = comm.allreduce(hi, comm::ReduceOp::Max);
  std::vector<double> out(f.size(), 0.0);
  if (!(hi > lo)) {
    if (warning) *warning = "normalizer: constant field, output set to zero";
    return out;
  }
  const double range = hi - lo;
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = (f[i] - lo) / range;
  return out;
}

std::vector<double> smooth_scalar_field(dist::GhostedBlock& block, std::vector<double> f, int iterations) {
  if (iterations < 0) throw AlgorithmError("smoother: negative iteration count");
  const Id n = block.local_count(0);
  if (static_cast<Id>(f.size()) != n) throw AlgorithmError("smoother: field size does not match the block");
  block.require_exchange(0);
  const auto& tri = block.triangulation();
  // Closed neighborhoods of the owned vertices, sorted by global id.
  std::vector<Id> owned;
  std::vector<std::size_t> start{0};
  std::vector<Id> terms;
  std::vector<Id> nb;
  for (Id v = 0; v < n; ++v) {
    if (block.is_ghost(0, v)) continue;
    owned.push_back(v);
    tri.vertex_neighbors(v, nb);
    nb.push_back(v);
    std::sort(nb.begin(), nb.end(), [&](Id a, Id b) { return block.global_id(0, a) < block.global_id(0, b); });
    terms.insert(terms.end(), nb.begin(), nb.end());
    start.push_back(terms.size());
  }
  std::vector<double> next = f;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < owned.size(); ++i) {
      double sum = 0.0;
      for (std::size_t j = start[i]; j < start[i + 1]; ++j) sum += f[static_cast<std::size_t>(terms[j])];
      next[static_cast<std::size_t>(owned[i])] = sum / static_cast<double>(start[i + 1] - start[i]);
    }
    block.exchange_ghosts(0, next);
    f.swap(next);
  }
  return f;
}

}  // namespace ptopo::algo
