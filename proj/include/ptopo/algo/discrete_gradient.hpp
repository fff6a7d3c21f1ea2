#pragma once

#include <array>
#include <vector>

#include "ptopo/algo/order.hpp"

namespace ptopo::algo {

/// A discrete vector: `facet` (dimension `dim`) paired with `cofacet`
/// (dimension dim + 1), both as global ids with their global vertex tuples.
struct GradientPair {
  int dim = 0;
  Id facet = -1;
  Id cofacet = -1;
  SimplexVertices facet_vertices;
  SimplexVertices cofacet_vertices;
};

struct CriticalSimplex {
  int dim = 0;
  Id gid = -1;
  SimplexVertices vertices;
};

/// The part of the gradient computed by one rank: the lower stars of its
/// owned vertices. The union over ranks is the full field.
struct DiscreteGradient {
  std::vector<GradientPair> pairs;
  std::vector<CriticalSimplex> critical;

  std::array<Id, 4> critical_counts() const;
};

/// ProcessLowerStars over the owned vertices (no communication once the
/// intermediate ids are preconditioned). Sorted by (dim, global id).
DiscreteGradient compute_discrete_gradient(dist::GhostedBlock& block, const OrderField& order);

}  // namespace ptopo::algo
