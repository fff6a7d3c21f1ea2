#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstring>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "ptopo/comm/message.hpp"

namespace ptopo::comm {

enum class Backend { Simulated, Tcp };

enum class ReduceOp { Min, Max, Sum };

/// Identifies a collective so that mismatched sequences can be detected.
enum class CollectiveKind : std::uint8_t {
  Barrier = 1,
  Allreduce = 2,
  PrefixSum = 3,
  Allgather = 4,
  Gather = 5,
  Scatter = 6,
};

const char* to_string(CollectiveKind k);

/// Raised on every rank once the world has been aborted.
class WorldAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the funneled contract is violated or a collective sequence
/// does not match across ranks.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Rank identity plus point-to-point and collective messaging.
///
/// Only the thread that first uses a communicator may call it afterwards
/// (funneled contract). Compute phases may use any number of threads as long
/// as they do not touch the communicator.
class Communicator {
 public:
  Communicator(int rank, int size) : rank_(rank), size_(size) {}
  virtual ~Communicator() = default;
  Communicator(const Communicator&) = delete;
  Communicator& operator=(const Communicator&) = delete;

  int rank() const { return rank_; }
  int size() const { return size_; }
  virtual Backend backend() const = 0;

  void send(int to, Message msg);
  Message recv(int from, int tag);

  void barrier();

  template <class T> T allreduce(T value, ReduceOp op) {
    static_assert(std::is_arithmetic_v<T>);
    auto all = exchange(CollectiveKind::Allreduce, bytes_of(value));
    T acc = value_of<T>(all[0]);
    for (std::size_t r = 1; r < all.size(); ++r) {
      T v = value_of<T>(all[r]);
      switch (op) {
        case ReduceOp::Min: acc = std::min(acc, v); break;
        case ReduceOp::Max: acc = std::max(acc, v); break;
        case ReduceOp::Sum: acc = acc + v; break;
      }
    }
    return acc;
  }

  /// Sum of `count` over all ranks strictly below this one.
  std::int64_t exclusive_prefix_sum(std::int64_t count);

  template <class T> std::vector<T> allgather(const T& value) {
    auto all = exchange(CollectiveKind::Allgather, bytes_of(value));
    std::vector<T> out;
    out.reserve(all.size());
    for (auto& b : all) out.push_back(value_of<T>(b));
    return out;
  }

  /// Variable-length allgather; element i holds rank i's vector.
  template <class T> std::vector<std::vector<T>> allgatherv(const std::vector<T>& values) {
    auto all = exchange(CollectiveKind::Allgather, bytes_of_vector(values));
    std::vector<std::vector<T>> out;
    out.reserve(all.size());
    for (auto& b : all) out.push_back(vector_of<T>(b));
    return out;
  }

  /// Root receives one entry per rank; other ranks receive an empty list.
  template <class T> std::vector<std::vector<T>> gatherv_to_root(const std::vector<T>& values) {
    auto all = exchange_to_root(CollectiveKind::Gather, bytes_of_vector(values));
    std::vector<std::vector<T>> out;
    if (rank_ != 0) return out;
    for (auto& b : all) out.push_back(vector_of<T>(b));
    return out;
  }

  template <class T> std::vector<T> gather_to_root(const T& value) {
    auto all = exchange_to_root(CollectiveKind::Gather, bytes_of(value));
    std::vector<T> out;
    if (rank_ != 0) return out;
    for (auto& b : all) out.push_back(value_of<T>(b));
    return out;
  }

  /// Root supplies one entry per rank; every rank gets its own entry.
  template <class T> T scatter_from_root(const std::vector<T>& values) {
    std::vector<std::vector<std::byte>> parts;
    if (rank_ == 0) {
      if (static_cast<int>(values.size()) != size_)
        throw ContractViolation("scatter_from_root: root must supply one value per rank");
      for (auto& v : values) parts.push_back(bytes_of(v));
    }
    return value_of<T>(scatter_bytes(std::move(parts)));
  }

  template <class T> std::vector<T> scatterv_from_root(const std::vector<std::vector<T>>& values) {
    std::vector<std::vector<std::byte>> parts;
    if (rank_ == 0) {
      if (static_cast<int>(values.size()) != size_)
        throw ContractViolation("scatterv_from_root: root must supply one list per rank");
      for (auto& v : values) parts.push_back(bytes_of_vector(v));
    }
    return vector_of<T>(scatter_bytes(std::move(parts)));
  }

  // Instrumentation.
  std::uint64_t barrier_count() const { return barriers_; }
  std::uint64_t collective_count() const { return collectives_; }
  std::uint64_t messages_sent() const { return sent_; }

 protected:
  /// Every rank contributes `mine`; returns all contributions in rank order.
  virtual std::vector<std::vector<std::byte>> do_exchange_all(CollectiveKind kind,
                                                              std::vector<std::byte> mine) = 0;
  /// Root gets all contributions; others may get an empty result.
  virtual std::vector<std::vector<std::byte>> do_exchange_to_root(CollectiveKind kind,
                                                                  std::vector<std::byte> mine) {
    return do_exchange_all(kind, std::move(mine));
  }
  /// Root supplies one part per rank; each rank returns its part.
  virtual std::vector<std::byte> do_scatter(std::vector<std::vector<std::byte>> parts);
  virtual void do_send(int to, Message msg) = 0;
  virtual Message do_recv(int from, int tag) = 0;

  void check_thread();

 private:
  std::vector<std::vector<std::byte>> exchange(CollectiveKind kind, std::vector<std::byte> mine);
  std::vector<std::vector<std::byte>> exchange_to_root(CollectiveKind kind, std::vector<std::byte> mine);
  std::vector<std::byte> scatter_bytes(std::vector<std::vector<std::byte>> parts);

  template <class T> static std::vector<std::byte> bytes_of(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::vector<std::byte> b(sizeof(T));
    std::memcpy(b.data(), &v, sizeof(T));
    return b;
  }
  template <class T> static T value_of(const std::vector<std::byte>& b) {
    if (b.size() != sizeof(T)) throw ContractViolation("collective called with incompatible types across ranks");
    T v;
    std::memcpy(&v, b.data(), sizeof(T));
    return v;
  }
  template <class T> static std::vector<std::byte> bytes_of_vector(const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::vector<std::byte> b(v.size() * sizeof(T));
    if (!v.empty()) std::memcpy(b.data(), v.data(), b.size());
    return b;
  }
  template <class T> static std::vector<T> vector_of(const std::vector<std::byte>& b) {
    if (b.size() % sizeof(T) != 0) throw ContractViolation("collective called with incompatible types across ranks");
    std::vector<T> v(b.size() / sizeof(T));
    if (!v.empty()) std::memcpy(v.data(), b.data(), b.size());
    return v;
  }

  int rank_;
  int size_;
  std::atomic<std::thread::id> owner_thread_{};
  std::uint64_t barriers_ = 0;
  std::uint64_t collectives_ = 0;
  std::uint64_t sent_ = 0;
};

}  // namespace ptopo::comm
