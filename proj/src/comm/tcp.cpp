/*
 * Copyright 2026 The Tessera Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <thread>

#include "tessera/comm/transport.hpp"

namespace tessera::comm {

namespace {

constexpr char kHandshakeMagic[4] = {'C', 'Y', 'H', 'S'};
constexpr uint16_t kHandshakeVersion = 1;
constexpr size_t kHandshakeSize = 16;

using Clock = std::chrono::steady_clock;

std::string errno_text() { return std::strerror(errno); }

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now()).count();
  return left <= 0 ? 0 : static_cast<int>(std::min<int64_t>(left, INT32_MAX));
}

// Waits for `events` on fd until the deadline; false on timeout.
bool wait_fd(int fd, short events, Clock::time_point deadline) {
  for (;;) {
    pollfd p{fd, events, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) throw CommError("poll failed: " + errno_text());
  }
}

void write_all(int fd, const uint8_t* data, size_t n, int peer) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw CommError("send to rank " + std::to_string(peer) + " failed: " + errno_text(), peer);
    }
    data += w;
    n -= static_cast<size_t>(w);
  }
}

void read_all(int fd, uint8_t* data, size_t n, int peer, Clock::time_point deadline) {
  while (n > 0) {
    if (!wait_fd(fd, POLLIN, deadline)) {
      throw CommError("timed out receiving from rank " + std::to_string(peer), peer);
    }
    const ssize_t r = ::recv(fd, data, n, 0);
    if (r == 0) throw CommError("peer rank " + std::to_string(peer) + " disconnected", peer);
    if (r < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw CommError("receive from rank " + std::to_string(peer) + " failed: " + errno_text(), peer);
    }
    data += r;
    n -= static_cast<size_t>(r);
  }
}

void put_le(uint8_t* out, uint64_t v, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = static_cast<uint8_t>((v >> (8 * i)) & 0xFF);
}

uint64_t get_le(const uint8_t* in, size_t n) {
  uint64_t v = 0;
  for (size_t i = 0; i < n; ++i) v |= static_cast<uint64_t>(in[i]) << (8 * i);
  return v;
}

std::array<uint8_t, kHandshakeSize> make_handshake(size_t rank, size_t world_size) {
  std::array<uint8_t, kHandshakeSize> hs{};
  std::memcpy(hs.data(), kHandshakeMagic, 4);
  put_le(hs.data() + 4, kHandshakeVersion, 2);
  put_le(hs.data() + 6, rank, 4);
  put_le(hs.data() + 10, world_size, 4);
  return hs;
}

// Returns the sender rank of a validated handshake.
size_t check_handshake(const std::array<uint8_t, kHandshakeSize>& hs, size_t world_size) {
  if (std::memcmp(hs.data(), kHandshakeMagic, 4) != 0) throw CommError("bad handshake magic");
  const auto version = get_le(hs.data() + 4, 2);
  if (version != kHandshakeVersion) throw CommError("unsupported handshake version " + std::to_string(version));
  const auto sender = get_le(hs.data() + 6, 4);
  const auto ws = get_le(hs.data() + 10, 4);
  if (ws != world_size) {
    throw CommError("world size mismatch: peer rank " + std::to_string(sender) + " says " + std::to_string(ws) +
                        ", expected " + std::to_string(world_size),
                    static_cast<int>(sender));
  }
  if (sender >= world_size) throw CommError("handshake from out-of-range rank " + std::to_string(sender));
  return static_cast<size_t>(sender);
}

addrinfo* resolve(const HostPort& hp, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(hp.port);
  const int rc = ::getaddrinfo(hp.host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) throw CommError("cannot resolve " + hp.host + ": " + ::gai_strerror(rc));
  return res;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

HostPort parse_host_port(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw InvalidArgument("malformed address '" + address + "', expected host:port");
  }
  unsigned port = 0;
  const char* first = address.data() + colon + 1;
  const char* last = address.data() + address.size();
  auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc() || ptr != last || port == 0 || port > 65535) {
    throw InvalidArgument("malformed port in address '" + address + "'");
  }
  return {address.substr(0, colon), static_cast<uint16_t>(port)};
}

std::vector<std::string> read_hosts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read hosts file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    line = line.substr(start);
    parse_host_port(line);
    out.push_back(line);
  }
  if (out.empty()) throw InvalidArgument("hosts file '" + path + "' lists no peers");
  return out;
}

TcpTransport::TcpTransport(size_t rank, std::vector<std::string> peer_addresses, TcpOptions options)
    : rank_(rank), addresses_(std::move(peer_addresses)), options_(options), fds_(addresses_.size(), -1) {
  const size_t ws = addresses_.size();
  if (ws == 0) throw InvalidArgument("tcp transport needs at least one peer address");
  if (rank_ >= ws) throw InvalidArgument("rank " + std::to_string(rank_) + " out of range for " + std::to_string(ws) + " peers");
  std::vector<HostPort> peers;
  for (const auto& a : addresses_) peers.push_back(parse_host_port(a));
  if (ws == 1) return;

  const auto deadline = Clock::now() + options_.connect_timeout;
  try {
    // Listen first so lower ranks never wait on us.
    if (rank_ + 1 < ws) {
      addrinfo* res = resolve(peers[rank_], true);
      listen_fd_ = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
      if (listen_fd_ < 0) {
        ::freeaddrinfo(res);
        throw CommError("socket: " + errno_text());
      }
      int one = 1;
      ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
      if (::bind(listen_fd_, res->ai_addr, res->ai_addrlen) != 0) {
        const std::string err = errno_text();
        ::freeaddrinfo(res);
        throw CommError("rank " + std::to_string(rank_) + " cannot listen on " + addresses_[rank_] + ": " + err);
      }
      ::freeaddrinfo(res);
      if (::listen(listen_fd_, static_cast<int>(ws)) != 0) throw CommError("listen: " + errno_text());
    }

    // Dial every lower rank, retrying while its listener comes up.
    for (size_t peer = 0; peer < rank_; ++peer) {
      auto backoff = Millis(10);
      for (;;) {
        addrinfo* res = resolve(peers[peer], false);
        int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
        if (fd < 0) {
          ::freeaddrinfo(res);
          throw CommError("socket: " + errno_text());
        }
        const int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
        ::freeaddrinfo(res);
        if (rc == 0) {
          fds_[peer] = fd;
          break;
        }
        ::close(fd);
        if (Clock::now() + backoff > deadline) {
          throw CommError("timed out connecting to rank " + std::to_string(peer) + " at " + addresses_[peer],
                          static_cast<int>(peer));
        }
        std::this_thread::sleep_for(backoff);
        backoff = std::min(backoff * 2, Millis(500));
      }
      set_nodelay(fds_[peer]);
      auto hs = make_handshake(rank_, ws);
      write_all(fds_[peer], hs.data(), hs.size(), static_cast<int>(peer));
      std::array<uint8_t, kHandshakeSize> reply{};
      read_all(fds_[peer], reply.data(), reply.size(), static_cast<int>(peer), deadline);
      const size_t sender = check_handshake(reply, ws);
      if (sender != peer) {
        throw CommError("dialed rank " + std::to_string(peer) + " but rank " + std::to_string(sender) + " answered",
                        static_cast<int>(peer));
      }
    }

    // Accept every higher rank.
    for (size_t accepted = 0; accepted < ws - rank_ - 1; ++accepted) {
      if (!wait_fd(listen_fd_, POLLIN, deadline)) {
        throw CommError("timed out waiting for higher ranks to connect to rank " + std::to_string(rank_));
      }
      const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
      if (fd < 0) {
        if (errno == EINTR) {
          --accepted;
          continue;
        }
        throw CommError("accept: " + errno_text());
      }
      set_nodelay(fd);
      std::array<uint8_t, kHandshakeSize> hs{};
      try {
        read_all(fd, hs.data(), hs.size(), -1, deadline);
        const size_t sender = check_handshake(hs, ws);
        if (sender <= rank_) {
          throw CommError("unexpected connection from rank " + std::to_string(sender), static_cast<int>(sender));
        }
        if (fds_[sender] != -1) {
          throw CommError("rank collision: rank " + std::to_string(sender) + " connected twice",
                          static_cast<int>(sender));
        }
        auto reply = make_handshake(rank_, ws);
        write_all(fd, reply.data(), reply.size(), static_cast<int>(sender));
        fds_[sender] = fd;
      } catch (...) {
        ::close(fd);
        throw;
      }
    }
  } catch (...) {
    close();
    throw;
  }
}

TcpTransport::~TcpTransport() { close(); }

void TcpTransport::write_frame(size_t dest, const uint8_t* data, size_t n) {
  uint8_t header[8];
  put_le(header, n, 8);
  write_all(fds_[dest], header, 8, static_cast<int>(dest));
  if (n > 0) write_all(fds_[dest], data, n, static_cast<int>(dest));
}

Frame TcpTransport::read_frame(size_t src) {
  const auto deadline = Clock::now() + options_.recv_timeout;
  uint8_t header[8];
  read_all(fds_[src], header, 8, static_cast<int>(src), deadline);
  const uint64_t n = get_le(header, 8);
  Frame f;
  try {
    f.resize(n);
  } catch (const std::bad_alloc&) {
    throw CommError("rank " + std::to_string(src) + " announced an unallocatable frame of " + std::to_string(n) +
                        " bytes",
                    static_cast<int>(src));
  }
  if (n > 0) read_all(fds_[src], f.data(), n, static_cast<int>(src), deadline);
  return f;
}

void TcpTransport::send_frame(size_t dest, Frame bytes) {
  if (dest >= world_size() || dest == rank_) {
    throw CommError("tcp transport cannot send to rank " + std::to_string(dest), static_cast<int>(dest));
  }
  if (bytes.empty()) throw CommError("empty frames are not allowed", static_cast<int>(dest));
  if (fds_[dest] < 0) throw CommError("connection to rank " + std::to_string(dest) + " is closed", static_cast<int>(dest));
  count_sent(bytes.size());
  write_frame(dest, bytes.data(), bytes.size());
}

Frame TcpTransport::recv_frame(size_t src) {
  if (src >= world_size() || src == rank_) {
    throw CommError("tcp transport cannot receive from rank " + std::to_string(src), static_cast<int>(src));
  }
  if (fds_[src] < 0) throw CommError("connection to rank " + std::to_string(src) + " is closed", static_cast<int>(src));
  Frame f = read_frame(src);
  if (f.empty()) throw CommError("protocol error: barrier frame from rank " + std::to_string(src) + " during data exchange", static_cast<int>(src));
  return f;
}

// Zero-length frames mark a barrier; data frames are never empty.
void TcpTransport::barrier() {
  for (size_t peer = 0; peer < world_size(); ++peer) {
    if (peer != rank_) write_frame(peer, nullptr, 0);
  }
  for (size_t peer = 0; peer < world_size(); ++peer) {
    if (peer == rank_) continue;
    Frame f = read_frame(peer);
    if (!f.empty()) {
      throw CommError("protocol error: data frame from rank " + std::to_string(peer) + " at barrier",
                      static_cast<int>(peer));
    }
  }
}

void TcpTransport::close() {
  for (auto& fd : fds_) {
    if (fd >= 0) {
      ::shutdown(fd, SHUT_RDWR);
      ::close(fd);
      fd = -1;
    }
  }
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
}

}  // namespace tessera::comm
