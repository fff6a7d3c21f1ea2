#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "ptopo/comm/simulated.hpp"
#include "ptopo/dist/explicit_block.hpp"
#include "ptopo/dist/grid_block.hpp"
#include "ptopo/dist/partition.hpp"

using namespace ptopo;
using namespace ptopo::dist;
using comm::Communicator;
using comm::spawn_world;

namespace {

GridData make_grid(Coords dims, bool periodic) {
  GridData g;
  g.dims = dims;
  g.periodic = periodic;
  g.origin = {0, 0, 0};
  g.spacing = {1, 1, 1};
  auto& f = g.fields["f"];
  for (Id v = 0; v < dims[0] * dims[1] * dims[2]; ++v) f.push_back(static_cast<double>(v) * 0.5);
  return g;
}

MeshData make_mesh(Coords dims) {
  GridModel m(dims, false);
  MeshData mesh;
  mesh.dim = m.dimension();
  mesh.points = grid_points(m, {0, 0, 0}, {1, 1, 1});
  mesh.cells = grid_cells(m);
  auto& f = mesh.fields["f"];
  for (Id v = 0; v < m.vertex_count(); ++v) f.push_back(static_cast<double>(v));
  return mesh;
}

struct Snapshot {
  std::array<std::map<Id, SimplexVertices>, 4> owned;  // gid -> global vertex tuple
  std::array<std::map<Id, bool>, 4> boundary;          // gid -> boundary flag
};

Snapshot snapshot(GhostedBlock& b) {
  Snapshot s;
  for (int k = 0; k <= b.dimension(); ++k) {
    b.require_ids(k);
    b.require_boundary();
    for (Id i = 0; i < b.local_count(k); ++i) {
      if (b.is_ghost(k, i)) continue;
      s.owned[k][b.global_id(k, i)] = b.global_vertices(k, i);
      s.boundary[k][b.global_id(k, i)] = b.is_global_boundary(k, i);
    }
  }
  return s;
}

Snapshot merge(const std::vector<Snapshot>& parts) {
  Snapshot all;
  for (auto& p : parts)
    for (int k = 0; k < 4; ++k) {
      for (auto& [g, t] : p.owned[k]) {
        CHECK(all.owned[k].count(g) == 0);
        all.owned[k][g] = t;
      }
      for (auto& [g, f] : p.boundary[k]) all.boundary[k][g] = f;
    }
  return all;
}

/// The tuple sets must be the same and gids must be dense; ids must be
/// identical to the single-rank numbering.
void check_same(const Snapshot& a, const Snapshot& b, int dim) {
  for (int k = 0; k <= dim; ++k) {
    REQUIRE(a.owned[k].size() == b.owned[k].size());
    Id expect = 0;
    for (auto& [g, t] : a.owned[k]) CHECK(g == expect++);
    CHECK(a.owned[k] == b.owned[k]);
    CHECK(a.boundary[k] == b.boundary[k]);
  }
}

}  // namespace

TEST_CASE("grid partition by recursive bisection") {
  auto boxes = partition_grid({8, 4, 4}, 2);
  REQUIRE(boxes.size() == 2);
  CHECK(boxes[0].lo == Coords{0, 0, 0});
  CHECK(boxes[0].hi == Coords{3, 3, 3});
  CHECK(boxes[1].lo == Coords{4, 0, 0});
  auto b4 = partition_grid({8, 4, 4}, 4);
  Id total = 0;
  for (auto& b : b4) {
    auto e = b.extent();
    total += e[0] * e[1] * e[2];
  }
  CHECK(total == 128);
  for (std::size_t i = 0; i < b4.size(); ++i)
    for (std::size_t j = i + 1; j < b4.size(); ++j) {
      bool disjoint = false;
      for (int a = 0; a < 3; ++a)
        disjoint = disjoint || b4[i].hi[a] < b4[j].lo[a] || b4[j].hi[a] < b4[i].lo[a];
      CHECK(disjoint);
    }
  CHECK_THROWS_AS(partition_grid({2, 1, 1}, 3), PartitionError);
}

TEST_CASE("ghosted grid block extraction") {
  auto g = make_grid({8, 4, 4}, false);
  auto in = extract_grid_block(g, 2, 1);
  CHECK(in.local_dims == Coords{5, 4, 4});
  CHECK(in.origin == Point{3, 0, 0});
  Id ghosts = std::count(in.vertex_ghost.begin(), in.vertex_ghost.end(), 1);
  CHECK(ghosts == 16);
  CHECK(in.fields["f"][0] == g.fields["f"][3]);
  auto r0 = extract_grid_block(g, 2, 0);
  CHECK(r0.origin == Point{0, 0, 0});
  CHECK(r0.local_dims == Coords{5, 4, 4});
}

TEST_CASE("mesh block extraction on the two-triangle square") {
  MeshData m;
  m.dim = 2;
  m.points = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  m.cells = {{0, 1, 2}, {1, 3, 2}};
  m.fields["f"] = {0, 1, 2, 3};
  auto b0 = extract_mesh_block(m, 2, 0);
  CHECK(b0.cells.size() == 2);
  CHECK(b0.cell_ghost == std::vector<std::uint8_t>{0, 1});
  // Vertex 3 is first covered by cell 1, owned by rank 1.
  CHECK(b0.vertex_ghost == std::vector<std::uint8_t>{0, 0, 0, 1});
  auto b1 = extract_mesh_block(m, 2, 1);
  CHECK(b1.cell_ghost == std::vector<std::uint8_t>{1, 0});
  CHECK(std::count(b1.vertex_ghost.begin(), b1.vertex_ghost.end(), 0) == 1);
  auto empty = extract_mesh_block(m, 4, 0);
  CHECK(empty.cells.empty());
  CHECK(empty.points.empty());
}

TEST_CASE("explicit global ids are rank-count independent") {
  auto mesh = make_mesh({4, 3, 3});
  Snapshot reference;
  for (int p : {1, 2, 3, 4, 8}) {
    auto parts = spawn_world<Snapshot>(p, [&](Communicator& c) {
      ExplicitBlock b(c, extract_mesh_block(mesh, c.size(), c.rank()));
      return snapshot(b);
    });
    auto all = merge(parts);
    if (p == 1) reference = all;
    else check_same(all, reference, 3);
  }
  GridModel model({4, 3, 3}, false);
  for (int k = 0; k <= 3; ++k) CHECK(static_cast<Id>(reference.owned[k].size()) == model.simplex_count(k));
}

TEST_CASE("interval edge numbering on the Kuhn cube matches the sequential one") {
  auto mesh = make_mesh({2, 2, 2});
  auto seq = spawn_world<Snapshot>(1, [&](Communicator& c) {
    ExplicitBlock b(c, extract_mesh_block(mesh, 1, 0));
    return snapshot(b);
  });
  CHECK(seq[0].owned[1].size() == 19);
  CHECK(seq[0].owned[2].size() == 18);
  for (int p : {2, 3, 6}) {
    auto parts = spawn_world<Snapshot>(p, [&](Communicator& c) {
      ExplicitBlock b(c, extract_mesh_block(mesh, c.size(), c.rank()));
      return snapshot(b);
    });
    check_same(merge(parts), seq[0], 3);
  }
}

TEST_CASE("implicit global ids match the global grid model") {
  for (bool periodic : {false, true}) {
    auto g = make_grid({6, 5, 4}, periodic);
    GridModel model(g.dims, periodic);
    for (int p : {1, 2, 4, 8}) {
      spawn_world(p, [&](Communicator& c) {
        GridBlock b(c, extract_grid_block(g, c.size(), c.rank()));
        for (int k = 0; k <= 3; ++k) {
          b.require_ids(k);
          for (Id i = 0; i < b.local_count(k); ++i) {
            Id gid = b.global_id(k, i);
            CHECK(model.simplex_vertices(k, gid) == b.global_vertices(k, i));
          }
        }
      });
      auto counts = spawn_world<std::vector<Id>>(p, [&](Communicator& c) {
        GridBlock b(c, extract_grid_block(g, c.size(), c.rank()));
        std::vector<Id> out;
        for (int k = 0; k <= 3; ++k) out.push_back(b.global_count(k));
        return out;
      });
      for (int k = 0; k <= 3; ++k) CHECK(counts[0][static_cast<std::size_t>(k)] == model.simplex_count(k));
    }
  }
}

TEST_CASE("implicit and explicit blocks agree on ownership-independent data") {
  auto g = make_grid({5, 4, 3}, false);
  auto mesh = make_mesh({5, 4, 3});
  GridModel model(g.dims, false);
  for (int p : {1, 3, 4}) {
    auto parts = spawn_world<Snapshot>(p, [&](Communicator& c) {
      GridBlock b(c, extract_grid_block(g, c.size(), c.rank()));
      return snapshot(b);
    });
    auto all = merge(parts);
    for (int k = 0; k <= 3; ++k) {
      CHECK(static_cast<Id>(all.owned[k].size()) == model.simplex_count(k));
      for (auto& [gid, flag] : all.boundary[k]) CHECK(flag == model.is_on_boundary(k, gid));
    }
  }
  auto seq = spawn_world<Snapshot>(1, [&](Communicator& c) {
    ExplicitBlock b(c, extract_mesh_block(mesh, 1, 0, true));
    return snapshot(b);
  });
  for (int k = 0; k <= 3; ++k) {
    std::map<SimplexVertices, bool> ex;
    for (auto& [gid, t] : seq[0].owned[k]) ex[t] = seq[0].boundary[k].at(gid);
    for (Id gid = 0; gid < model.simplex_count(k); ++gid) CHECK(ex.at(model.simplex_vertices(k, gid)) == model.is_on_boundary(k, gid));
  }
}

TEST_CASE("ghost exchange makes every copy equal to the owned value") {
  auto mesh = make_mesh({4, 4, 3});
  auto g = make_grid({7, 5, 4}, true);
  for (int p : {2, 4, 5}) {
    spawn_world(p, [&](Communicator& c) {
      std::vector<std::unique_ptr<GhostedBlock>> blocks;
      blocks.push_back(std::make_unique<ExplicitBlock>(c, extract_mesh_block(mesh, c.size(), c.rank())));
      blocks.push_back(std::make_unique<GridBlock>(c, extract_grid_block(g, c.size(), c.rank())));
      for (auto& b : blocks)
        for (int k = 0; k <= b->dimension(); ++k) {
          b->require_ids(k);
          std::vector<double> vals(static_cast<std::size_t>(b->local_count(k)));
          for (Id i = 0; i < b->local_count(k); ++i)
            vals[i] = b->is_ghost(k, i) ? -1.0 : static_cast<double>(b->global_id(k, i)) * 3.0;
          b->exchange_ghosts(k, vals);
          for (Id i = 0; i < b->local_count(k); ++i) CHECK(vals[i] == static_cast<double>(b->global_id(k, i)) * 3.0);
          std::vector<Id> owners(vals.size());
          for (Id i = 0; i < b->local_count(k); ++i) owners[i] = b->is_ghost(k, i) ? -5 : c.rank();
          b->exchange_ghosts(k, owners);
          for (Id i = 0; i < b->local_count(k); ++i) CHECK(owners[i] == b->owner(k, i));
        }
    });
  }
}

TEST_CASE("exchange partners are symmetric") {
  auto g = make_grid({9, 6, 5}, false);
  auto nbs = spawn_world<std::vector<int>>(6, [&](Communicator& c) {
    GridBlock b(c, extract_grid_block(g, c.size(), c.rank()));
    return b.neighbors();
  });
  for (int r = 0; r < 6; ++r)
    for (int q : nbs[r]) {
      CHECK(q != r);
      CHECK(std::count(nbs[q].begin(), nbs[q].end(), r) == 1);
    }
}

TEST_CASE("slab partition neighbors only adjacent ranks") {
  MeshData mesh = make_mesh({2, 2, 9});
  std::stable_sort(mesh.cells.begin(), mesh.cells.end(), [](const auto& a, const auto& b) {
    return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end());
  });
  auto nbs = spawn_world<std::vector<int>>(4, [&](Communicator& c) {
    ExplicitBlock b(c, extract_mesh_block(mesh, c.size(), c.rank()));
    return b.neighbors();
  });
  CHECK(nbs[1] == std::vector<int>{0, 2});
  CHECK(nbs[0] == std::vector<int>{1});
  CHECK(nbs[3] == std::vector<int>{2});
}

TEST_CASE("periodic blocks see ghosts from both sides") {
  auto g = make_grid({8, 4, 4}, true);
  spawn_world(2, [&](Communicator& c) {
    GridBlock b(c, extract_grid_block(g, c.size(), c.rank()));
    CHECK(b.local_model().dims() == Coords{6, 6, 6});
    CHECK(b.builds().at(category::kPeriodic) == 1);
    GridModel model(g.dims, true);
    for (Id v = 0; v < b.local_count(0); ++v) {
      Id gid = b.global_id(0, v);
      CHECK(b.field("f")[v] == g.fields["f"][gid]);
    }
    Id interior_like = 0;
    std::vector<Id> nb;
    for (Id v = 0; v < b.local_count(0); ++v) {
      if (b.is_ghost(0, v)) continue;
      b.triangulation().vertex_neighbors(v, nb);
      CHECK(nb.size() == 14);
      ++interior_like;
    }
    CHECK(interior_like == 64);
    b.require_boundary();
    for (int k = 0; k <= 3; ++k) {
      b.require_ids(k);
      for (Id i = 0; i < b.local_count(k); ++i) CHECK_FALSE(b.is_global_boundary(k, i));
    }
  });
}

TEST_CASE("preconditioning is idempotent") {
  auto mesh = make_mesh({3, 3, 3});
  spawn_world(3, [&](Communicator& c) {
    ExplicitBlock b(c, extract_mesh_block(mesh, c.size(), c.rank()));
    b.require_ids(1);
    b.require_boundary();
    b.require_exchange(0);
    const int before = b.total_builds();
    b.require_ids(1);
    b.require_boundary();
    b.require_exchange(0);
    CHECK(b.total_builds() == before);
    CHECK(b.builds().at(category::kIntermediateIds) == 1);
  });
}

TEST_CASE("mismatched geometry across ranks is rejected") {
  auto g = make_grid({6, 4, 4}, false);
  CHECK_THROWS_AS(spawn_world(2,
                              [&](Communicator& c) {
                                auto in = extract_grid_block(g, c.size(), c.rank());
                                if (c.rank() == 1) in.spacing[0] = 2.0;
                                GridBlock b(c, in);
                              }),
                  comm::WorldError);
}
