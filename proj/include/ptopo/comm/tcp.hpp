#pragma once

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ptopo/comm/communicator.hpp"

namespace ptopo::comm {

struct TcpConfig {
  int rank = 0;
  int size = 1;
  /// "host:port" for every rank, indexed by rank.
  std::vector<std::string> peers;
  double connect_timeout_s = 30.0;
};

/// Reads PTOPO_RANK, PTOPO_NRANKS and PTOPO_PEERS (comma separated host:port).
std::optional<TcpConfig> tcp_config_from_env();

/// Frame layout: 8-byte little-endian payload length, 4-byte tag, 1-byte
/// element type code, payload.
std::vector<std::byte> encode_frame(const Message& m);
/// Decodes one complete frame; throws MessageError on malformed input.
Message decode_frame(std::span<const std::byte> frame);

/// Picks `n` currently free loopback ports.
std::vector<int> pick_free_ports(int n);

/// Multi-process backend: one outgoing connection per ordered rank pair,
/// a reader thread per incoming connection draining into per-source queues.
class TcpCommunicator final : public Communicator {
 public:
  explicit TcpCommunicator(const TcpConfig& cfg);
  ~TcpCommunicator() override;
  Backend backend() const override { return Backend::Tcp; }

 protected:
  std::vector<std::vector<std::byte>> do_exchange_all(CollectiveKind kind, std::vector<std::byte> mine) override;
  std::vector<std::vector<std::byte>> do_exchange_to_root(CollectiveKind kind, std::vector<std::byte> mine) override;
  void do_send(int to, Message msg) override;
  Message do_recv(int from, int tag) override;

 private:
  struct Inbox {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Message> queue;
    bool closed = false;
    std::string error;
  };
  void reader_loop(int from, int fd);
  void write_frame(int to, const Message& m);
  std::vector<std::vector<std::byte>> gather_root(CollectiveKind kind, std::vector<std::byte> mine);

  int listen_fd_ = -1;
  std::vector<int> out_fd_;
  std::vector<int> in_fd_;
  std::vector<std::unique_ptr<Inbox>> inbox_;
  std::vector<std::thread> readers_;
};

}  // namespace ptopo::comm
