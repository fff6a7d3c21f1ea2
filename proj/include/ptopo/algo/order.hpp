#pragma once

#include <stdexcept>
#include <vector>

#include "ptopo/dist/ghosted_block.hpp"

namespace ptopo::algo {

class AlgorithmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Total order on the vertices of a block: (f(v), global id) compared
/// lexicographically. `rank` holds a dense local rank consistent with that
/// comparator; copies of the same global vertex share a rank.
struct OrderField {
  std::vector<Id> rank;
  /// Position of each local vertex in the global ascending order; empty
  /// until build_global_order() ran.
  std::vector<Id> global_order;

  bool less(Id a, Id b) const { return rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)]; }
  Id operator[](Id v) const { return rank[static_cast<std::size_t>(v)]; }
  std::size_t size() const { return rank.size(); }
};

/// Local sort of the block's vertices. No communication.
OrderField compute_order(const dist::GhostedBlock& block, const std::vector<double>& f);

/// Dense global order (collective): (f, gid) pairs of owned vertices are
/// gathered at rank 0, sorted, and the positions scattered back; ghosts are
/// then filled by one ghost exchange.
void build_global_order(dist::GhostedBlock& block, const std::vector<double>& f, OrderField& order);

/// The global order as a field of doubles, convenient for pipelines.
std::vector<double> order_as_field(const OrderField& order);

}  // namespace ptopo::algo
