#include "ptopo/comm/tcp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <sstream>

namespace ptopo::comm {

namespace {

constexpr int kCollectiveUpTag = -7;
constexpr int kCollectiveDownTag = -8;
constexpr std::size_t kHeaderSize = 8 + 4 + 1;

std::runtime_error sys_error(const std::string& what) {
  return std::runtime_error(what + ": " + std::strerror(errno));
}

std::pair<std::string, int> split_host_port(const std::string& s) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("peer address must be host:port, got '" + s + "'");
  return {s.substr(0, colon), std::stoi(s.substr(colon + 1))};
}

sockaddr_in resolve(const std::string& host, int port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw std::runtime_error("cannot resolve host '" + host + "'");
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

void write_all(int fd, const void* data, std::size_t n) {
  auto* p = static_cast<const char*>(data);
  while (n > 0) {
    auto k = ::send(fd, p, n, MSG_NOSIGNAL);
    if (k < 0) {
      if (errno == EINTR) continue;
      throw sys_error("send");
    }
    p += k;
    n -= static_cast<std::size_t>(k);
  }
}

// Returns false on clean EOF before any byte was read.
bool read_all(int fd, void* data, std::size_t n) {
  auto* p = static_cast<char*>(data);
  std::size_t got = 0;
  while (got < n) {
    auto k = ::recv(fd, p + got, n - got, 0);
    if (k == 0) {
      if (got == 0) return false;
      throw std::runtime_error("connection closed mid-frame");
    }
    if (k < 0) {
      if (errno == EINTR) continue;
      throw sys_error("recv");
    }
    got += static_cast<std::size_t>(k);
  }
  return true;
}

void put_le(std::byte* dst, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) dst[i] = static_cast<std::byte>((v >> (8 * i)) & 0xff);
}

std::uint64_t get_le(const std::byte* src, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(src[i]) << (8 * i);
  return v;
}

}  // namespace

std::optional<TcpConfig> tcp_config_from_env() {
  const char* rank = std::getenv("PTOPO_RANK");
  const char* size = std::getenv("PTOPO_NRANKS");
  const char* peers = std::getenv("PTOPO_PEERS");
  if (!rank || !size || !peers) return std::nullopt;
  TcpConfig cfg;
  cfg.rank = std::atoi(rank);
  cfg.size = std::atoi(size);
  std::stringstream ss(peers);
  std::string item;
  while (std::getline(ss, item, ',')) cfg.peers.push_back(item);
  if (static_cast<int>(cfg.peers.size()) != cfg.size)
    throw std::invalid_argument("PTOPO_PEERS must list one address per rank");
  return cfg;
}

std::vector<std::byte> encode_frame(const Message& m) {
  std::vector<std::byte> out(kHeaderSize + m.payload.size());
  put_le(out.data(), m.payload.size(), 8);
  put_le(out.data() + 8, static_cast<std::uint32_t>(m.tag), 4);
  out[12] = static_cast<std::byte>(m.type);
  if (!m.payload.empty()) std::memcpy(out.data() + kHeaderSize, m.payload.data(), m.payload.size());
  return out;
}

Message decode_frame(std::span<const std::byte> frame) {
  if (frame.size() < kHeaderSize) throw MessageError("frame shorter than header");
  auto len = get_le(frame.data(), 8);
  if (frame.size() != kHeaderSize + len) throw MessageError("frame length does not match header");
  Message m;
  m.tag = static_cast<std::int32_t>(static_cast<std::uint32_t>(get_le(frame.data() + 8, 4)));
  auto code = static_cast<std::uint8_t>(frame[12]);
  if (code > static_cast<std::uint8_t>(ElementType::Float64)) throw MessageError("unknown element type code");
  m.type = static_cast<ElementType>(code);
  if (len % element_size(m.type) != 0) throw MessageError("payload length is not a multiple of element size");
  m.payload.assign(frame.begin() + kHeaderSize, frame.end());
  return m;
}

std::vector<int> pick_free_ports(int n) {
  std::vector<int> fds, ports;
  for (int i = 0; i < n; ++i) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw sys_error("socket");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) throw sys_error("bind");
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    ports.push_back(ntohs(addr.sin_port));
    fds.push_back(fd);
  }
  for (int fd : fds) ::close(fd);
  return ports;
}

TcpCommunicator::TcpCommunicator(const TcpConfig& cfg)
    : Communicator(cfg.rank, cfg.size), out_fd_(cfg.size, -1), in_fd_(cfg.size, -1) {
  if (static_cast<int>(cfg.peers.size()) != cfg.size) throw std::invalid_argument("tcp: one peer address per rank");
  for (int r = 0; r < cfg.size; ++r) inbox_.push_back(std::make_unique<Inbox>());
  if (cfg.size == 1) return;

  auto [my_host, my_port] = split_host_port(cfg.peers[cfg.rank]);
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw sys_error("socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  auto addr = resolve(my_host, my_port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) throw sys_error("bind");
  if (::listen(listen_fd_, cfg.size) < 0) throw sys_error("listen");

  std::string accept_error;
  std::thread acceptor([&] {
    try {
      for (int k = 0; k < cfg.size - 1; ++k) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) throw sys_error("accept");
        std::int32_t peer = -1;
        if (!read_all(fd, &peer, sizeof peer) || peer < 0 || peer >= cfg.size || in_fd_[peer] != -1)
          throw std::runtime_error("tcp: bad hello from peer");
        in_fd_[peer] = fd;
      }
    } catch (const std::exception& e) {
      accept_error = e.what();
    }
  });

  auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(cfg.connect_timeout_s);
  for (int r = 0; r < cfg.size; ++r) {
    if (r == cfg.rank) continue;
    auto [host, port] = split_host_port(cfg.peers[r]);
    auto peer_addr = resolve(host, port);
    for (;;) {
      int fd = ::socket(AF_INET, SOCK_STREAM, 0);
      if (fd < 0) throw sys_error("socket");
      if (::connect(fd, reinterpret_cast<sockaddr*>(&peer_addr), sizeof peer_addr) == 0) {
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        std::int32_t me = cfg.rank;
        write_all(fd, &me, sizeof me);
        out_fd_[r] = fd;
        break;
      }
      ::close(fd);
      if (std::chrono::steady_clock::now() > deadline) {
        acceptor.detach();
        throw std::runtime_error("tcp: timed out connecting to rank " + std::to_string(r));
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  acceptor.join();
  if (!accept_error.empty()) throw std::runtime_error(accept_error);
  for (int r = 0; r < cfg.size; ++r)
    if (r != cfg.rank) readers_.emplace_back([this, r] { reader_loop(r, in_fd_[r]); });
}

TcpCommunicator::~TcpCommunicator() {
  for (int fd : out_fd_)
    if (fd >= 0) ::shutdown(fd, SHUT_WR);
  for (auto& t : readers_) t.join();
  for (int fd : out_fd_)
    if (fd >= 0) ::close(fd);
  for (int fd : in_fd_)
    if (fd >= 0) ::close(fd);
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpCommunicator::reader_loop(int from, int fd) {
  auto& box = *inbox_[from];
  try {
    for (;;) {
      std::byte header[kHeaderSize];
      if (!read_all(fd, header, kHeaderSize)) break;
      auto len = get_le(header, 8);
      std::vector<std::byte> frame(kHeaderSize + len);
      std::memcpy(frame.data(), header, kHeaderSize);
      if (len && !read_all(fd, frame.data() + kHeaderSize, len)) throw std::runtime_error("connection closed mid-frame");
      auto m = decode_frame(frame);
      std::lock_guard lock(box.mu);
      box.queue.push_back(std::move(m));
      box.cv.notify_all();
    }
  } catch (const std::exception& e) {
    std::lock_guard lock(box.mu);
    box.error = e.what();
  }
  std::lock_guard lock(box.mu);
  box.closed = true;
  box.cv.notify_all();
}

void TcpCommunicator::write_frame(int to, const Message& m) {
  auto frame = encode_frame(m);
  write_all(out_fd_[to], frame.data(), frame.size());
}

void TcpCommunicator::do_send(int to, Message msg) {
  if (to == rank()) throw ContractViolation("tcp backend: send to self is not supported");
  if (msg.tag < 0) throw ContractViolation("negative tags are reserved");
  write_frame(to, msg);
}

Message TcpCommunicator::do_recv(int from, int tag) {
  if (from == rank()) throw ContractViolation("tcp backend: recv from self is not supported");
  auto& box = *inbox_[from];
  std::unique_lock lock(box.mu);
  for (;;) {
    for (auto it = box.queue.begin(); it != box.queue.end(); ++it) {
      if (it->tag == tag) {
        Message m = std::move(*it);
        box.queue.erase(it);
        return m;
      }
    }
    if (box.closed) {
      std::ostringstream os;
      os << "recv(from=" << from << ", tag=" << tag << ") on rank " << rank() << ": peer terminated"
         << (box.error.empty() ? "" : " (" + box.error + ")");
      throw WorldAborted(os.str());
    }
    box.cv.wait(lock);
  }
}

std::vector<std::vector<std::byte>> TcpCommunicator::gather_root(CollectiveKind kind, std::vector<std::byte> mine) {
  std::vector<std::vector<std::byte>> all(size());
  if (rank() != 0) {
    ByteWriter w;
    w.put<std::uint8_t>(static_cast<std::uint8_t>(kind));
    w.put_vector(mine);
    write_frame(0, w.message(kCollectiveUpTag));
    return all;
  }
  all[0] = std::move(mine);
  for (int r = 1; r < size(); ++r) {
    auto m = do_recv(r, kCollectiveUpTag);
    ByteReader rd(m.payload);
    auto k = static_cast<CollectiveKind>(rd.get<std::uint8_t>());
    if (k != kind) {
      std::ostringstream os;
      os << "collective sequence mismatch: rank 0 called " << to_string(kind) << " while rank " << r << " called "
         << to_string(k);
      throw ContractViolation(os.str());
    }
    all[r] = rd.get_vector<std::byte>();
  }
  return all;
}

std::vector<std::vector<std::byte>> TcpCommunicator::do_exchange_to_root(CollectiveKind kind,
                                                                         std::vector<std::byte> mine) {
  if (size() == 1) return {std::move(mine)};
  auto all = gather_root(kind, std::move(mine));
  // Release the other ranks so that a gather has the same synchronising
  // behaviour as in the simulated backend.
  if (rank() == 0) {
    for (int r = 1; r < size(); ++r) write_frame(r, Message{kCollectiveDownTag, ElementType::Bytes, {}});
  } else {
    do_recv(0, kCollectiveDownTag);
  }
  return all;
}

std::vector<std::vector<std::byte>> TcpCommunicator::do_exchange_all(CollectiveKind kind,
                                                                     std::vector<std::byte> mine) {
  if (size() == 1) return {std::move(mine)};
  auto all = gather_root(kind, std::move(mine));
  if (rank() == 0) {
    ByteWriter w;
    for (auto& b : all) w.put_vector(b);
    auto table = w.message(kCollectiveDownTag);
    for (int r = 1; r < size(); ++r) write_frame(r, table);
    return all;
  }
  auto m = do_recv(0, kCollectiveDownTag);
  ByteReader rd(m.payload);
  for (int r = 0; r < size(); ++r) all[r] = rd.get_vector<std::byte>();
  return all;
}

}  // namespace ptopo::comm
