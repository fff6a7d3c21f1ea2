#pragma once

#include <condition_variable>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ptopo/comm/communicator.hpp"

namespace ptopo::comm {

/// Failure of one rank, reported by spawn_world after every rank stopped.
class WorldError : public std::runtime_error {
 public:
  WorldError(int rank, const std::string& what)
      : std::runtime_error("rank " + std::to_string(rank) + ": " + what), rank_(rank) {}
  int failed_rank() const { return rank_; }

 private:
  int rank_;
};

/// Shared state of an in-process world: per-pair FIFO mailboxes and one
/// collective rendezvous slot.
class SimulatedWorld {
 public:
  explicit SimulatedWorld(int n_ranks);

  int size() const { return n_; }

  void post(int from, int to, Message msg);
  Message take(int self, int from, int tag);
  std::vector<std::vector<std::byte>> collective(int self, CollectiveKind kind, std::vector<std::byte> mine);

  void abort(int rank, const std::string& why);
  void finished(int rank);
  bool aborted() const;
  std::optional<std::pair<int, std::string>> abort_reason() const;

 private:
  struct WaitState {
    enum class Kind { None, Recv, Collective } kind = Kind::None;
    int from = -1;
    int tag = 0;
  };
  bool has_match(int self, int from, int tag) const;
  void check_deadlock_locked(int self);
  [[noreturn]] void abort_locked(int rank, const std::string& why);

  int n_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  // mailbox_[to][from]
  std::vector<std::vector<std::deque<Message>>> mailbox_;
  std::vector<bool> done_;
  std::vector<WaitState> waiting_;
  bool aborted_ = false;
  int abort_rank_ = -1;
  std::string abort_why_;

  // Collective slot.
  bool departing_ = false;
  int arrived_ = 0;
  int departed_ = 0;
  std::vector<std::vector<std::byte>> contributions_;
  std::vector<CollectiveKind> kinds_;
  std::vector<bool> contributed_;
  std::vector<std::vector<std::byte>> result_;
};

class SimulatedCommunicator final : public Communicator {
 public:
  SimulatedCommunicator(std::shared_ptr<SimulatedWorld> world, int rank)
      : Communicator(rank, world->size()), world_(std::move(world)) {}
  Backend backend() const override { return Backend::Simulated; }

 protected:
  std::vector<std::vector<std::byte>> do_exchange_all(CollectiveKind kind, std::vector<std::byte> mine) override {
    return world_->collective(rank(), kind, std::move(mine));
  }
  void do_send(int to, Message msg) override { world_->post(rank(), to, std::move(msg)); }
  Message do_recv(int from, int tag) override { return world_->take(rank(), from, tag); }

 private:
  std::shared_ptr<SimulatedWorld> world_;
};

/// Runs `rank_main` once per rank, each on its own thread, and returns the
/// per-rank results in rank order. Throws WorldError naming the first rank
/// that failed.
template <class R> std::vector<R> spawn_world(int n_ranks, const std::function<R(Communicator&)>& rank_main) {
  if (n_ranks < 1) throw std::invalid_argument("spawn_world: n_ranks must be >= 1");
  auto world = std::make_shared<SimulatedWorld>(n_ranks);
  std::vector<std::optional<R>> results(n_ranks);
  std::vector<std::thread> threads;
  threads.reserve(n_ranks);
  for (int r = 0; r < n_ranks; ++r) {
    threads.emplace_back([&, r] {
      SimulatedCommunicator comm(world, r);
      try {
        results[r].emplace(rank_main(comm));
        world->finished(r);
      } catch (const WorldAborted&) {
        world->finished(r);
      } catch (const std::exception& e) {
        world->abort(r, e.what());
      } catch (...) {
        world->abort(r, "unknown exception");
      }
    });
  }
  for (auto& t : threads) t.join();
  if (auto why = world->abort_reason()) throw WorldError(why->first, why->second);
  std::vector<R> out;
  out.reserve(n_ranks);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

inline void spawn_world(int n_ranks, const std::function<void(Communicator&)>& rank_main) {
  spawn_world<int>(n_ranks, [&](Communicator& c) {
    rank_main(c);
    return 0;
  });
}

}  // namespace ptopo::comm
