#pragma once

#include <vector>

#include "ptopo/algo/order.hpp"

namespace ptopo::algo {

struct CriticalPoint {
  Id gid = -1;
  /// 0 for minima, d for maxima, saddles in between.
  int index = 0;
  bool degenerate = false;
  bool boundary = false;
  Point position{};
  int owner = 0;
  bool operator==(const CriticalPoint&) const = default;
};

/// Lower and upper link of a vertex split into connected components. Each
/// component lists local vertex ids; components are ordered by their
/// smallest global vertex id.
struct LinkSplit {
  std::vector<std::vector<Id>> lower;
  std::vector<std::vector<Id>> upper;
  /// Euler characteristics of the lower and upper link.
  Id lower_euler = 0;
  Id upper_euler = 0;
};

/// Components are found by union-find over the vertices of the star cells.
LinkSplit split_link(const dist::GhostedBlock& block, const OrderField& order, Id v);

/// Index from the component counts and Euler characteristics of the lower
/// and upper link; returns -1 for regular vertices. In 3D a side whose
/// Euler characteristic falls short of its component count has a loop,
/// which makes the vertex critical even with one component per side.
/// Sets `degenerate` for saddles with more than two components on a side or
/// with both saddle kinds at once.
int classify_link(int dim, std::size_t lower, std::size_t upper, Id lower_euler, Id upper_euler, bool& degenerate);

/// Classifies every non-ghost vertex of the block; no communication. The
/// result is sorted by global id.
std::vector<CriticalPoint> classify_critical_points(dist::GhostedBlock& block, const OrderField& order);

}  // namespace ptopo::algo
