#pragma once

#include <string>
#include <vector>

#include "ptopo/algo/order.hpp"

namespace ptopo::algo {

enum class Direction { Forward, Backward };

/// The part of one integral line traced by one rank. A line is identified by
/// its seed and fork path; its segments are chained by `start_step`, and a
/// segment handed to another rank ends with the vertex where the next one
/// starts.
struct LineSegment {
  Id seed = -1;
  std::vector<int> fork_path;
  Id start_step = 0;
  std::vector<Id> vertices;
  std::vector<Point> points;
  std::vector<double> distance;
  std::vector<double> values;
  int owner = 0;
  int prev_rank = -1;
  int next_rank = -1;
};

struct LineSet {
  Direction direction = Direction::Forward;
  std::vector<LineSegment> segments;
  /// Number of communication rounds the tracing needed.
  int rounds = 0;
};

/// A complete line, assembled from its segments.
struct IntegralLine {
  Id seed = -1;
  std::vector<int> fork_path;
  std::vector<Id> vertices;
  std::vector<Point> points;
  std::vector<double> distance;
  std::vector<double> values;
  /// Rank that traced each vertex.
  std::vector<int> owner;
};

/// Steepest ascent (Forward) or descent (Backward) from the given global
/// vertex ids (collective). At a vertex whose upper link has several
/// components, the line ends and one child line per component starts there,
/// components ordered by their smallest global vertex id. `attribute`, if
/// given, is sampled along the lines.
LineSet compute_integral_lines(dist::GhostedBlock& block, const OrderField& order, const std::vector<Id>& seeds,
                               Direction direction, const std::vector<double>* attribute = nullptr);

/// Replaces the sampled values of every segment with `attribute` read at its
/// vertices. Every vertex of a segment is present in the block that traced
/// it, so this needs no communication.
void sample_attribute(const dist::GhostedBlock& block, LineSet& lines, const std::vector<double>& attribute);

/// Jacobi smoothing of the line geometry: every point that is not an end of
/// its line becomes the mean of itself and its two neighbors (collective;
/// segments trade their boundary points with the neighboring segments'
/// ranks every iteration).
void smooth_geometry(comm::Communicator& comm, LineSet& lines, int iterations);

/// Gathers every segment at rank 0 and chains them; other ranks get an
/// empty list. Lines are sorted by (seed, fork path).
std::vector<IntegralLine> assemble_lines(comm::Communicator& comm, const LineSet& lines);

struct LineCriticalPoint {
  Id seed = -1;
  std::vector<int> fork_path;
  Id step = 0;
  Id gid = -1;
  /// 0 for minima, 1 for maxima along the line.
  int index = 0;
  Point position{};
  double value = 0.0;
};

/// Extrema of the sampled attribute along each line, compared by
/// (value, global id).
std::vector<LineCriticalPoint> line_critical_points(const std::vector<IntegralLine>& lines);

/// "-" for an empty path, otherwise the indices joined by '.'.
std::string fork_path_string(const std::vector<int>& path);

}  // namespace ptopo::algo
