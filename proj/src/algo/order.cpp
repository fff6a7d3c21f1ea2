#include "ptopo/algo/order.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

namespace ptopo::algo {

namespace {

void check_field(const dist::GhostedBlock& block, const std::vector<double>& f) {
  if (static_cast<Id>(f.size()) != block.local_count(0))
    throw AlgorithmError("order: field size does not match the number of local vertices");
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::isnan(f[i]))
      throw AlgorithmError("order: NaN at global vertex " + std::to_string(block.global_id(0, static_cast<Id>(i))) +
                           " (no total order)");
}

}  // namespace

OrderField compute_order(const dist::GhostedBlock& block, const std::vector<double>& f) {
  check_field(block, f);
  const auto n = f.size();
  std::vector<Id> gid(n);
  for (std::size_t i = 0; i < n; ++i) gid[i] = block.global_id(0, static_cast<Id>(i));
  std::vector<Id> idx(n);
  std::iota(idx.begin(), idx.end(), Id{0});
  auto key = [&](Id v) { return std::make_pair(f[static_cast<std::size_t>(v)], gid[static_cast<std::size_t>(v)]); };
  std::sort(idx.begin(), idx.end(), [&](Id a, Id b) { return key(a) < key(b); });
  OrderField out;
  out.rank.resize(n);
  Id r = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || key(idx[i - 1]) != key(idx[i])) ++r;
    out.rank[static_cast<std::size_t>(idx[i])] = r;
  }
  return out;
}

void build_global_order(dist::GhostedBlock& block, const std::vector<double>& f, OrderField& order) {
  check_field(block, f);
  auto& comm = block.comm();
  std::vector<double> values;
  std::vector<Id> gids;
  std::vector<Id> owned;
  for (Id v = 0; v < block.local_count(0); ++v) {
    if (block.is_ghost(0, v)) continue;
    owned.push_back(v);
    values.push_back(f[static_cast<std::size_t>(v)]);
    gids.push_back(block.global_id(0, v));
  }
  auto all_values = comm.gatherv_to_root(values);
  auto all_gids = comm.gatherv_to_root(gids);
  std::vector<std::vector<Id>> positions;
  if (comm.rank() == 0) {
    struct Entry {
      double f;
      Id gid;
      int rank;
      std::size_t slot;
    };
    std::vector<Entry> entries;
    for (int r = 0; r < comm.size(); ++r)
      for (std::size_t i = 0; i < all_values[r].size(); ++i) entries.push_back({all_values[r][i], all_gids[r][i], r, i});
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return std::tie(a.f, a.gid) < std::tie(b.f, b.gid); });
    positions.resize(static_cast<std::size_t>(comm.size()));
    for (int r = 0; r < comm.size(); ++r) positions[r].resize(all_values[r].size());
    for (std::size_t i = 0; i < entries.size(); ++i) positions[entries[i].rank][entries[i].slot] = static_cast<Id>(i);
  }
  auto mine = comm.scatterv_from_root(positions);
  order.global_order.assign(static_cast<std::size_t>(block.local_count(0)), -1);
  for (std::size_t i = 0; i < owned.size(); ++i) order.global_order[static_cast<std::size_t>(owned[i])] = mine[i];
  block.require_exchange(0);
  block.exchange_ghosts(0, order.global_order);
}

std::vector<double> order_as_field(const OrderField& order) {
  const auto& src = order.global_order.empty() ? order.rank : order.global_order;
  return std::vector<double>(src.begin(), src.end());
}

}  // namespace ptopo::algo
