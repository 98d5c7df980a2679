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

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tessera/error.hpp"

namespace tessera::comm {

/// Transport or collective failure. `peer()` is the rank involved, or -1.
class CommError : public Error {
 public:
  CommError(const std::string& what, int peer = -1) : Error(what), peer_(peer) {}
  int peer() const { return peer_; }

 private:
  int peer_;
};

using Frame = std::vector<uint8_t>;
using Millis = std::chrono::milliseconds;

inline constexpr Millis kDefaultConnectTimeout{30'000};
inline constexpr Millis kDefaultRecvTimeout{300'000};

/// Reliable, ordered frame delivery between a fixed set of ranks.
///
/// send_frame may be called concurrently for distinct destinations, and
/// concurrently with recv_frame. Frames must be non-empty.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual size_t rank() const = 0;
  virtual size_t world_size() const = 0;

  virtual void send_frame(size_t dest, Frame bytes) = 0;
  virtual Frame recv_frame(size_t src) = 0;
  /// Returns after all world_size ranks have entered.
  virtual void barrier() = 0;
  virtual void close() = 0;

  /// Data frames handed to send_frame so far (barrier traffic excluded).
  uint64_t frames_sent() const { return frames_sent_.load(); }
  uint64_t bytes_sent() const { return bytes_sent_.load(); }

 protected:
  void count_sent(size_t bytes) {
    frames_sent_.fetch_add(1);
    bytes_sent_.fetch_add(bytes);
  }

 private:
  std::atomic<uint64_t> frames_sent_{0};
  std::atomic<uint64_t> bytes_sent_{0};
};

/// Shared state of one in-process world: a mailbox per (src, dest) pair and a
/// reusable barrier. Workers are threads of one OS process.
class InProcessHub {
 public:
  explicit InProcessHub(size_t world_size, Millis recv_timeout = kDefaultRecvTimeout);

  size_t world_size() const { return world_size_; }

  /// Fails every blocked and future operation with `reason`. Used to unwind the
  /// remaining workers when one of them fails.
  void abort(const std::string& reason);
  bool aborted() const;

 private:
  friend class InProcessTransport;

  struct Mailbox {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Frame> frames;
  };

  Mailbox& box(size_t src, size_t dest) { return *boxes_[src * world_size_ + dest]; }
  void attach(size_t rank);
  void detach(size_t rank);
  bool closed(size_t rank);
  void check_abort_locked() const;

  size_t world_size_;
  Millis recv_timeout_;
  std::vector<std::unique_ptr<Mailbox>> boxes_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<uint8_t> attached_;
  std::vector<uint8_t> closed_;
  size_t barrier_count_ = 0;
  uint64_t barrier_generation_ = 0;
  bool aborted_ = false;
  std::string abort_reason_;
};

class InProcessTransport final : public Transport {
 public:
  /// Throws CommError if `rank` is already attached to the hub.
  InProcessTransport(std::shared_ptr<InProcessHub> hub, size_t rank);
  ~InProcessTransport() override;

  size_t rank() const override { return rank_; }
  size_t world_size() const override { return hub_->world_size(); }
  void send_frame(size_t dest, Frame bytes) override;
  Frame recv_frame(size_t src) override;
  void barrier() override;
  void close() override;

 private:
  std::shared_ptr<InProcessHub> hub_;
  size_t rank_;
  bool closed_ = false;
};

struct TcpOptions {
  Millis connect_timeout = kDefaultConnectTimeout;
  Millis recv_timeout = kDefaultRecvTimeout;
};

/// Full-mesh TCP. Rank r listens on peer_addresses[r], dials every lower rank
/// and accepts every higher rank. Each connection starts with a 16-byte
/// handshake ("CYHS", version u16, sender rank u32, world size u32, reserved
/// u16) in both directions; frames then travel as u64 length + payload.
class TcpTransport final : public Transport {
 public:
  TcpTransport(size_t rank, std::vector<std::string> peer_addresses, TcpOptions options = {});
  ~TcpTransport() override;

  size_t rank() const override { return rank_; }
  size_t world_size() const override { return addresses_.size(); }
  void send_frame(size_t dest, Frame bytes) override;
  Frame recv_frame(size_t src) override;
  void barrier() override;
  void close() override;

 private:
  void write_frame(size_t dest, const uint8_t* data, size_t n);
  Frame read_frame(size_t src);

  size_t rank_;
  std::vector<std::string> addresses_;
  TcpOptions options_;
  int listen_fd_ = -1;
  std::vector<int> fds_;
};

struct HostPort {
  std::string host;
  uint16_t port;
};

/// Parses "host:port"; throws InvalidArgument when malformed.
HostPort parse_host_port(const std::string& address);

/// Reads a peer-address file: one host:port per line, line number = rank.
/// Blank lines and lines starting with '#' are skipped.
std::vector<std::string> read_hosts_file(const std::string& path);

}  // namespace tessera::comm
