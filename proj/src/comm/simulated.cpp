#include "ptopo/comm/simulated.hpp"

#include <sstream>

namespace ptopo::comm {

SimulatedWorld::SimulatedWorld(int n_ranks)
    : n_(n_ranks),
      mailbox_(n_ranks, std::vector<std::deque<Message>>(n_ranks)),
      done_(n_ranks, false),
      waiting_(n_ranks),
      contributions_(n_ranks),
      kinds_(n_ranks),
      contributed_(n_ranks, false) {}

void SimulatedWorld::post(int from, int to, Message msg) {
  std::lock_guard lock(mu_);
  if (aborted_) throw WorldAborted("world aborted");
  mailbox_[to][from].push_back(std::move(msg));
  cv_.notify_all();
}

bool SimulatedWorld::has_match(int self, int from, int tag) const {
  for (auto& m : mailbox_[self][from])
    if (m.tag == tag) return true;
  return false;
}

void SimulatedWorld::abort_locked(int rank, const std::string& why) {
  if (!aborted_) {
    aborted_ = true;
    abort_rank_ = rank;
    abort_why_ = why;
  }
  cv_.notify_all();
  throw WorldAborted(why);
}

void SimulatedWorld::check_deadlock_locked(int self) {
  int alive = 0;
  for (int r = 0; r < n_; ++r) {
    if (done_[r]) continue;
    ++alive;
    auto& w = waiting_[r];
    switch (w.kind) {
      case WaitState::Kind::None: return;
      case WaitState::Kind::Recv:
        if (has_match(r, w.from, w.tag) || done_[w.from]) return;
        break;
      case WaitState::Kind::Collective:
        if (departing_) return;
        break;
    }
  }
  if (alive == 0) return;
  std::ostringstream os;
  os << "deadlock: every live rank is blocked (";
  bool first = true;
  for (int r = 0; r < n_; ++r) {
    if (done_[r]) continue;
    if (!first) os << ", ";
    first = false;
    auto& w = waiting_[r];
    if (w.kind == WaitState::Kind::Recv)
      os << "rank " << r << " in recv(from=" << w.from << ", tag=" << w.tag << ")";
    else
      os << "rank " << r << " in collective";
  }
  os << ")";
  abort_locked(self, os.str());
}

Message SimulatedWorld::take(int self, int from, int tag) {
  std::unique_lock lock(mu_);
  for (;;) {
    if (aborted_) throw WorldAborted("world aborted");
    auto& q = mailbox_[self][from];
    for (auto it = q.begin(); it != q.end(); ++it) {
      if (it->tag == tag) {
        Message m = std::move(*it);
        q.erase(it);
        return m;
      }
    }
    if (done_[from]) {
      std::ostringstream os;
      os << "recv(from=" << from << ", tag=" << tag << ") on rank " << self
         << ": source rank terminated without sending a matching message";
      abort_locked(self, os.str());
    }
    waiting_[self] = {WaitState::Kind::Recv, from, tag};
    check_deadlock_locked(self);
    cv_.wait(lock);
    waiting_[self] = {};
  }
}

std::vector<std::vector<std::byte>> SimulatedWorld::collective(int self, CollectiveKind kind,
                                                               std::vector<std::byte> mine) {
  std::unique_lock lock(mu_);
  while (departing_) {
    if (aborted_) throw WorldAborted("world aborted");
    cv_.wait(lock);
  }
  if (aborted_) throw WorldAborted("world aborted");
  contributions_[self] = std::move(mine);
  kinds_[self] = kind;
  contributed_[self] = true;
  ++arrived_;
  if (arrived_ == n_) {
    for (int r = 1; r < n_; ++r) {
      if (kinds_[r] != kinds_[0]) {
        std::ostringstream os;
        os << "collective sequence mismatch: rank 0 called " << to_string(kinds_[0]) << " while rank " << r
           << " called " << to_string(kinds_[r]);
        abort_locked(self, os.str());
      }
    }
    result_ = std::move(contributions_);
    contributions_.assign(n_, {});
    departing_ = true;
    cv_.notify_all();
  } else {
    for (;;) {
      if (aborted_) throw WorldAborted("world aborted");
      if (departing_) break;
      for (int r = 0; r < n_; ++r) {
        if (done_[r] && !contributed_[r]) {
          std::ostringstream os;
          os << "rank " << r << " terminated while rank " << self << " waits in " << to_string(kind);
          abort_locked(self, os.str());
        }
      }
      waiting_[self] = {WaitState::Kind::Collective, -1, 0};
      check_deadlock_locked(self);
      cv_.wait(lock);
      waiting_[self] = {};
    }
  }
  auto out = result_;
  if (++departed_ == n_) {
    departing_ = false;
    arrived_ = 0;
    departed_ = 0;
    contributed_.assign(n_, false);
    result_.clear();
    cv_.notify_all();
  }
  return out;
}

void SimulatedWorld::abort(int rank, const std::string& why) {
  std::lock_guard lock(mu_);
  if (!aborted_) {
    aborted_ = true;
    abort_rank_ = rank;
    abort_why_ = why;
  }
  done_[rank] = true;
  cv_.notify_all();
}

void SimulatedWorld::finished(int rank) {
  std::lock_guard lock(mu_);
  done_[rank] = true;
  cv_.notify_all();
  // Waiters re-check their predicates (and deadlock) when woken.
}

bool SimulatedWorld::aborted() const {
  std::lock_guard lock(mu_);
  return aborted_;
}

std::optional<std::pair<int, std::string>> SimulatedWorld::abort_reason() const {
  std::lock_guard lock(mu_);
  if (!aborted_) return std::nullopt;
  return std::make_pair(abort_rank_, abort_why_);
}

}  // namespace ptopo::comm
