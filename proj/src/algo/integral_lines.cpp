#include "ptopo/algo/integral_lines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "ptopo/algo/critical_points.hpp"
#include "ptopo/dist/exchange.hpp"
#include "ptopo/dist/grid_block.hpp"

namespace ptopo::algo {

namespace {

using dist::Bytes;

/// Where a traced line is continued: a line key, the step and distance
/// reached, and the vertex to resume from.
struct Task {
  Id seed = -1;
  std::vector<int> path;
  Id step = 0;
  double distance = 0.0;
  Id gid = -1;
  int prev_rank = -1;
  Coords unwrapped{0, 0, 0};
};

/// Line geometry. Grid blocks use integer coordinates unwrapped across
/// periodic boundaries, so every rank computes bit-identical points.
class Geometry {
 public:
  explicit Geometry(const dist::GhostedBlock& block)
      : block_(block), grid_(dynamic_cast<const dist::GridBlock*>(&block)) {}

  Coords coords(Id v) const { return grid_ ? grid_->global_coords(v) : Coords{0, 0, 0}; }

  Point point(Id v, const Coords& shift) const {
    if (!grid_) return block_.position(v);
    auto c = coords(v);
    const auto& o = grid_->global_origin();
    const auto& s = grid_->spacing();
    Point p;
    for (int a = 0; a < 3; ++a) p[a] = o[a] + static_cast<double>(c[a] + shift[a]) * s[a];
    return p;
  }

 private:
  const dist::GhostedBlock& block_;
  const dist::GridBlock* grid_;
};

double dist3(const Point& a, const Point& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1], dz = b[2] - a[2];
  return std::sqrt((dx * dx + dy * dy) + dz * dz);
}

Coords add(const Coords& a, const Coords& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Coords sub(const Coords& a, const Coords& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

void put_path(comm::ByteWriter& w, const std::vector<int>& path) { w.put_vector(path); }

void put_points(comm::ByteWriter& w, const std::vector<Point>& pts) {
  std::vector<double> flat;
  flat.reserve(pts.size() * 3);
  for (auto& p : pts) flat.insert(flat.end(), p.begin(), p.end());
  w.put_vector(flat);
}

std::vector<Point> get_points(comm::ByteReader& r) {
  auto flat = r.get_vector<double>();
  std::vector<Point> pts(flat.size() / 3);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]};
  return pts;
}

void put_segment(comm::ByteWriter& w, const LineSegment& s) {
  w.put(s.seed);
  put_path(w, s.fork_path);
  w.put(s.start_step).put_vector(s.vertices);
  put_points(w, s.points);
  w.put_vector(s.distance).put_vector(s.values).put(s.owner).put(s.prev_rank).put(s.next_rank);
}

LineSegment get_segment(comm::ByteReader& r) {
  LineSegment s;
  s.seed = r.get<Id>();
  s.fork_path = r.get_vector<int>();
  s.start_step = r.get<Id>();
  s.vertices = r.get_vector<Id>();
  s.points = get_points(r);
  s.distance = r.get_vector<double>();
  s.values = r.get_vector<double>();
  s.owner = r.get<int>();
  s.prev_rank = r.get<int>();
  s.next_rank = r.get<int>();
  return s;
}

auto segment_key(const LineSegment& s) { return std::tie(s.seed, s.fork_path, s.start_step); }

class Tracer {
 public:
  Tracer(dist::GhostedBlock& block, const OrderField& order, Direction dir, const std::vector<double>* attribute)
      : block_(block), order_(order), forward_(dir == Direction::Forward), attribute_(attribute), geo_(block) {}

  struct Work {
    Task task;
    Id local = -1;
    Coords shift{0, 0, 0};
    Id forced_next = -1;
    bool is_seed = false;
  };

  std::deque<Work> queue;
  std::map<int, std::vector<Task>> outgoing;
  std::vector<LineSegment> segments;

  Work resume(const Task& t) const {
    Id v = block_.local_id(0, t.gid);
    if (v < 0 || block_.is_ghost(0, v))
      throw AlgorithmError("integral lines: rank " + std::to_string(block_.rank()) + " received vertex " +
                           std::to_string(t.gid) + " it does not own");
    return {t, v, sub(t.unwrapped, geo_.coords(v)), -1, false};
  }

  void run(const Work& w) {
    LineSegment seg;
    seg.seed = w.task.seed;
    seg.fork_path = w.task.path;
    seg.start_step = w.task.step;
    seg.owner = block_.rank();
    seg.prev_rank = w.task.prev_rank;
    Id v = w.local;
    Coords shift = w.shift;
    double dist = w.task.distance;
    Point here = geo_.point(v, shift);
    append(seg, v, here, dist);
    Id forced = w.forced_next;
    while (true) {
      Id u = forced;
      forced = -1;
      if (u < 0) {
        auto link = split_link(block_, order_, v);
        auto& comps = forward_ ? link.upper : link.lower;
        if (comps.empty()) break;
        if (comps.size() > 1) {
          if (!(w.is_seed && seg.vertices.size() == 1)) segments.push_back(std::move(seg));
          for (std::size_t i = 0; i < comps.size(); ++i) {
            Work child;
            child.task = {w.task.seed, w.task.path, 0, dist, block_.global_id(0, v), -1, add(geo_.coords(v), shift)};
            child.task.path.push_back(static_cast<int>(i));
            child.local = v;
            child.shift = shift;
            child.forced_next = extremal(comps[i]);
            queue.push_back(std::move(child));
          }
          return;
        }
        u = extremal(comps[0]);
      }
      Point next = geo_.point(u, shift);
      dist += dist3(here, next);
      here = next;
      append(seg, u, here, dist);
      if (block_.is_ghost(0, u)) {
        const int owner = block_.owner(0, u);
        const Id gid = block_.global_id(0, u);
        if (owner == block_.rank()) {
          // Periodic copy of an owned vertex: continue from the owned copy.
          Id canonical = block_.local_id(0, gid);
          shift = add(shift, sub(geo_.coords(u), geo_.coords(canonical)));
          v = canonical;
          continue;
        }
        seg.next_rank = owner;
        Task t{seg.seed, seg.fork_path, seg.start_step + static_cast<Id>(seg.vertices.size()) - 1, dist, gid,
               block_.rank(), add(geo_.coords(u), shift)};
        outgoing[owner].push_back(std::move(t));
        segments.push_back(std::move(seg));
        return;
      }
      v = u;
    }
    segments.push_back(std::move(seg));
  }

 private:
  void append(LineSegment& seg, Id v, const Point& p, double dist) const {
    seg.vertices.push_back(block_.global_id(0, v));
    seg.points.push_back(p);
    seg.distance.push_back(dist);
    if (attribute_) seg.values.push_back((*attribute_)[static_cast<std::size_t>(v)]);
  }

  Id extremal(const std::vector<Id>& comp) const {
    Id best = comp[0];
    for (Id u : comp)
      if (forward_ ? order_.less(best, u) : order_.less(u, best)) best = u;
    return best;
  }

  dist::GhostedBlock& block_;
  const OrderField& order_;
  bool forward_;
  const std::vector<double>* attribute_;
  Geometry geo_;
};

}  // namespace

std::string fork_path_string(const std::vector<int>& path) {
  if (path.empty()) return "-";
  std::ostringstream os;
  for (std::size_t i = 0; i < path.size(); ++i) os << (i ? "." : "") << path[i];
  return os.str();
}

LineSet compute_integral_lines(dist::GhostedBlock& block, const OrderField& order, const std::vector<Id>& seeds,
                               Direction direction, const std::vector<double>* attribute) {
  if (static_cast<Id>(order.size()) != block.local_count(0))
    throw AlgorithmError("integral lines: order does not match the block");
  if (attribute && static_cast<Id>(attribute->size()) != block.local_count(0))
    throw AlgorithmError("integral lines: attribute size does not match the block");
  auto& comm = block.comm();
  std::vector<Id> unique_seeds = seeds;
  std::sort(unique_seeds.begin(), unique_seeds.end());
  unique_seeds.erase(std::unique(unique_seeds.begin(), unique_seeds.end()), unique_seeds.end());

  Tracer tracer(block, order, direction, attribute);
  Geometry geo(block);
  Id found = 0;
  for (Id gid : unique_seeds) {
    Id v = block.local_id(0, gid);
    if (v < 0 || block.is_ghost(0, v)) continue;
    ++found;
    Tracer::Work w;
    w.task = {gid, {}, 0, 0.0, gid, -1, geo.coords(v)};
    w.local = v;
    w.is_seed = true;
    tracer.queue.push_back(std::move(w));
  }
  if (comm.allreduce<Id>(found, comm::ReduceOp::Sum) != static_cast<Id>(unique_seeds.size()))
    throw AlgorithmError("integral lines: a seed is not a vertex owned by any rank");

  const auto& peers = block.neighbors();
  LineSet out;
  out.direction = direction;
  while (true) {
    while (!tracer.queue.empty()) {
      auto w = std::move(tracer.queue.front());
      tracer.queue.pop_front();
      tracer.run(w);
    }
    Id pending = 0;
    for (auto& [to, tasks] : tracer.outgoing) pending += static_cast<Id>(tasks.size());
    if (comm.allreduce<Id>(pending, comm::ReduceOp::Sum) == 0) break;
    ++out.rounds;
    std::map<int, Bytes> msgs;
    for (auto& [to, tasks] : tracer.outgoing) {
      if (std::find(peers.begin(), peers.end(), to) == peers.end())
        throw AlgorithmError("integral lines: handoff to a rank outside the adjacency graph");
      comm::ByteWriter w;
      w.put<std::uint64_t>(tasks.size());
      for (auto& t : tasks) {
        w.put(t.seed);
        put_path(w, t.path);
        w.put(t.step).put(t.distance).put(t.gid).put(t.prev_rank).put(t.unwrapped);
      }
      msgs[to] = w.take();
    }
    tracer.outgoing.clear();
    auto incoming = dist::exchange_with(comm, peers, dist::tags::kLineTasks, msgs);
    for (auto& [from, bytes] : incoming) {
      if (bytes.empty()) continue;
      comm::ByteReader r(bytes);
      auto n = r.get<std::uint64_t>();
      for (std::uint64_t i = 0; i < n; ++i) {
        Task t;
        t.seed = r.get<Id>();
        t.path = r.get_vector<int>();
        t.step = r.get<Id>();
        t.distance = r.get<double>();
        t.gid = r.get<Id>();
        t.prev_rank = r.get<int>();
        t.unwrapped = r.get<Coords>();
        tracer.queue.push_back(tracer.resume(t));
      }
    }
  }
  out.segments = std::move(tracer.segments);
  std::sort(out.segments.begin(), out.segments.end(),
            [](const LineSegment& a, const LineSegment& b) { return segment_key(a) < segment_key(b); });
  return out;
}

void sample_attribute(const dist::GhostedBlock& block, LineSet& lines, const std::vector<double>& attribute) {
  if (static_cast<Id>(attribute.size()) != block.local_count(0))
    throw AlgorithmError("line sampling: attribute size does not match the block");
  for (auto& s : lines.segments) {
    s.values.resize(s.vertices.size());
    for (std::size_t i = 0; i < s.vertices.size(); ++i) {
      Id v = block.local_id(0, s.vertices[i]);
      if (v < 0) throw AlgorithmError("line sampling: vertex " + std::to_string(s.vertices[i]) + " is not in the block");
      s.values[i] = attribute[static_cast<std::size_t>(v)];
    }
  }
}

void smooth_geometry(comm::Communicator& comm, LineSet& lines, int iterations) {
  if (iterations < 0) throw AlgorithmError("geometry smoother: negative iteration count");
  std::set<int> peer_set;
  for (auto& s : lines.segments) {
    if (s.prev_rank >= 0) peer_set.insert(s.prev_rank);
    if (s.next_rank >= 0) peer_set.insert(s.next_rank);
  }
  peer_set.erase(comm.rank());
  const std::vector<int> peers(peer_set.begin(), peer_set.end());
  // kind 0: the point before a segment's first point; kind 1: the point
  // after its last point (absent when that point ends the line).
  using Key = std::tuple<Id, std::vector<int>, Id, int>;
  for (int it = 0; it < iterations; ++it) {
    std::map<int, std::vector<std::pair<Key, std::optional<Point>>>> out;
    for (auto& s : lines.segments) {
      const auto n = s.points.size();
      if (s.next_rank >= 0)
        out[s.next_rank].push_back({{s.seed, s.fork_path, s.start_step + static_cast<Id>(n) - 1, 0}, s.points[n - 2]});
      if (s.prev_rank >= 0)
        out[s.prev_rank].push_back(
            {{s.seed, s.fork_path, s.start_step, 1}, n >= 2 ? std::optional<Point>(s.points[1]) : std::nullopt});
    }
    std::map<int, Bytes> msgs;
    for (auto& [to, entries] : out) {
      comm::ByteWriter w;
      w.put<std::uint64_t>(entries.size());
      for (auto& [key, p] : entries) {
        w.put(std::get<0>(key));
        put_path(w, std::get<1>(key));
        w.put(std::get<2>(key)).put(std::get<3>(key)).put<std::uint8_t>(p ? 1 : 0);
        if (p) w.put(*p);
      }
      msgs[to] = w.take();
    }
    std::map<Key, std::optional<Point>> received;
    for (auto& [from, bytes] : dist::exchange_with(comm, peers, dist::tags::kGeometry, msgs)) {
      if (bytes.empty()) continue;
      comm::ByteReader r(bytes);
      auto n = r.get<std::uint64_t>();
      for (std::uint64_t i = 0; i < n; ++i) {
        Key key;
        std::get<0>(key) = r.get<Id>();
        std::get<1>(key) = r.get_vector<int>();
        std::get<2>(key) = r.get<Id>();
        std::get<3>(key) = r.get<int>();
        std::optional<Point> p;
        if (r.get<std::uint8_t>()) p = r.get<Point>();
        received[key] = p;
      }
    }
    for (auto& s : lines.segments) {
      const auto n = s.points.size();
      std::optional<Point> before, after;
      if (s.prev_rank >= 0) before = received.at({s.seed, s.fork_path, s.start_step, 0});
      if (s.next_rank >= 0) after = received.at({s.seed, s.fork_path, s.start_step + static_cast<Id>(n) - 1, 1});
      std::vector<Point> next = s.points;
      for (std::size_t i = 0; i < n; ++i) {
        const Point* a = i > 0 ? &s.points[i - 1] : (before ? &*before : nullptr);
        const Point* c = i + 1 < n ? &s.points[i + 1] : (after ? &*after : nullptr);
        if (!a || !c) continue;
        for (int k = 0; k < 3; ++k) next[i][k] = ((*a)[k] + s.points[i][k] + (*c)[k]) / 3.0;
      }
      s.points = std::move(next);
    }
  }
}

std::vector<IntegralLine> assemble_lines(comm::Communicator& comm, const LineSet& lines) {
  comm::ByteWriter w;
  w.put<std::uint64_t>(lines.segments.size());
  for (auto& s : lines.segments) put_segment(w, s);
  auto all = comm.gatherv_to_root(w.take());
  std::vector<IntegralLine> out;
  if (comm.rank() != 0) return out;
  std::vector<LineSegment> segs;
  for (auto& bytes : all) {
    comm::ByteReader r(bytes);
    auto n = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) segs.push_back(get_segment(r));
  }
  std::sort(segs.begin(), segs.end(),
            [](const LineSegment& a, const LineSegment& b) { return segment_key(a) < segment_key(b); });
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    const bool continues = !out.empty() && out.back().seed == s.seed && out.back().fork_path == s.fork_path;
    if (!continues) {
      if (s.start_step != 0) throw AlgorithmError("assemble lines: line does not start at step 0");
      out.push_back({s.seed, s.fork_path, {}, {}, {}, {}, {}});
    }
    auto& line = out.back();
    std::size_t from = 0;
    if (continues) {
      if (static_cast<Id>(line.vertices.size()) - 1 != s.start_step || line.vertices.back() != s.vertices.front())
        throw AlgorithmError("assemble lines: segments of line " + std::to_string(s.seed) + "/" +
                             fork_path_string(s.fork_path) + " do not chain");
      // The shared vertex belongs to the later segment.
      line.owner.back() = s.owner;
      from = 1;
    }
    for (std::size_t j = from; j < s.vertices.size(); ++j) {
      line.vertices.push_back(s.vertices[j]);
      line.points.push_back(s.points[j]);
      line.distance.push_back(s.distance[j]);
      if (!s.values.empty()) line.values.push_back(s.values[j]);
      line.owner.push_back(s.owner);
    }
  }
  return out;
}

std::vector<LineCriticalPoint> line_critical_points(const std::vector<IntegralLine>& lines) {
  std::vector<LineCriticalPoint> out;
  for (auto& line : lines) {
    const auto n = line.vertices.size();
    if (n < 2) continue;
    if (line.values.size() != n) throw AlgorithmError("line critical points: lines carry no attribute values");
    auto key = [&](std::size_t i) { return std::make_pair(line.values[i], line.vertices[i]); };
    for (std::size_t i = 0; i < n; ++i) {
      int lower = 0, upper = 0;
      for (std::size_t j : {i - 1, i + 1}) {
        if (j >= n) continue;  // wraps for i == 0
        (key(j) < key(i) ? lower : upper)++;
      }
      if (lower && upper) continue;
      out.push_back({line.seed, line.fork_path, static_cast<Id>(i), line.vertices[i], lower ? 1 : 0, line.points[i],
                     line.values[i]});
    }
  }
  return out;
}

}  // namespace ptopo::algo
