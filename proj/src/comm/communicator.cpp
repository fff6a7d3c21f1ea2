#include "ptopo/comm/communicator.hpp"

#include <sstream>

namespace ptopo::comm {

const char* to_string(CollectiveKind k) {
  switch (k) {
    case CollectiveKind::Barrier: return "barrier";
    case CollectiveKind::Allreduce: return "allreduce";
    case CollectiveKind::PrefixSum: return "exclusive_prefix_sum";
    case CollectiveKind::Allgather: return "allgather";
    case CollectiveKind::Gather: return "gather_to_root";
    case CollectiveKind::Scatter: return "scatter_from_root";
  }
  return "unknown";
}

void Communicator::check_thread() {
  auto self = std::this_thread::get_id();
  std::thread::id expected{};
  if (owner_thread_.compare_exchange_strong(expected, self)) return;
  if (expected != self) {
    std::ostringstream os;
    os << "rank " << rank_ << ": communicator used from a thread other than the rank's main thread";
    throw ContractViolation(os.str());
  }
}

void Communicator::send(int to, Message msg) {
  check_thread();
  if (to < 0 || to >= size_) throw ContractViolation("send: destination rank out of range");
  ++sent_;
  do_send(to, std::move(msg));
}

Message Communicator::recv(int from, int tag) {
  check_thread();
  if (from < 0 || from >= size_) throw ContractViolation("recv: source rank out of range");
  return do_recv(from, tag);
}

void Communicator::barrier() {
  ++barriers_;
  exchange(CollectiveKind::Barrier, {});
}

std::int64_t Communicator::exclusive_prefix_sum(std::int64_t count) {
  auto all = exchange(CollectiveKind::PrefixSum, bytes_of(count));
  std::int64_t acc = 0;
  for (int r = 0; r < rank_; ++r) acc += value_of<std::int64_t>(all[r]);
  return acc;
}

std::vector<std::vector<std::byte>> Communicator::exchange(CollectiveKind kind, std::vector<std::byte> mine) {
  check_thread();
  ++collectives_;
  return do_exchange_all(kind, std::move(mine));
}

std::vector<std::vector<std::byte>> Communicator::exchange_to_root(CollectiveKind kind,
                                                                   std::vector<std::byte> mine) {
  check_thread();
  ++collectives_;
  return do_exchange_to_root(kind, std::move(mine));
}

std::vector<std::byte> Communicator::scatter_bytes(std::vector<std::vector<std::byte>> parts) {
  check_thread();
  ++collectives_;
  return do_scatter(std::move(parts));
}

std::vector<std::byte> Communicator::do_scatter(std::vector<std::vector<std::byte>> parts) {
  // Default: broadcast the whole table through an allgather and pick our slot.
  ByteWriter w;
  w.put<std::uint64_t>(parts.size());
  for (auto& p : parts) w.put_vector(p);
  auto all = do_exchange_all(CollectiveKind::Scatter, rank_ == 0 ? w.take() : std::vector<std::byte>{});
  ByteReader r(all[0]);
  auto n = r.get<std::uint64_t>();
  if (static_cast<int>(n) != size_) throw ContractViolation("scatter: malformed root table");
  std::vector<std::byte> mine;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto part = r.get_vector<std::byte>();
    if (static_cast<int>(i) == rank_) mine = std::move(part);
  }
  return mine;
}

}  // namespace ptopo::comm
