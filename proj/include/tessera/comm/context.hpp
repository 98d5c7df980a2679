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

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tessera/comm/transport.hpp"
#include "tessera/table.hpp"

namespace tessera::comm {

enum class TransportKind { InProcess, Tcp };

TransportKind parse_transport_kind(std::string_view s);

struct ContextConfig {
  size_t world_size = 1;
  size_t rank = 0;
  TransportKind transport = TransportKind::InProcess;
  /// Tcp only: one host:port per rank.
  std::vector<std::string> peer_addresses;
  /// InProcess only: shared by all workers of the world. Created on demand
  /// when world_size == 1.
  std::shared_ptr<InProcessHub> hub;
  Millis connect_timeout = kDefaultConnectTimeout;
  Millis recv_timeout = kDefaultRecvTimeout;
};

/// Distributed execution identity of one worker. Owned by exactly one worker
/// and not thread-safe.
class WorkerContext {
 public:
  explicit WorkerContext(std::unique_ptr<Transport> transport);
  WorkerContext(WorkerContext&&) noexcept = default;
  WorkerContext& operator=(WorkerContext&&) noexcept = default;
  ~WorkerContext();

  size_t rank() const { return transport_->rank(); }
  size_t world_size() const { return transport_->world_size(); }
  Transport& transport() { return *transport_; }
  const Transport& transport() const { return *transport_; }
  void barrier() { transport_->barrier(); }

 private:
  std::unique_ptr<Transport> transport_;
};

/// Connects the transport and passes one barrier, so every worker of the world
/// must call it.
WorkerContext init_context(const ContextConfig& config);

/// Runs `fn` on world_size worker threads, each with its own in-process
/// context. If any worker throws, the world is aborted (unblocking the rest)
/// and the first failure is rethrown after all threads have joined.
void run_in_process(size_t world_size, const std::function<void(WorkerContext&)>& fn,
                    Millis recv_timeout = kDefaultRecvTimeout);

/// BSP all-to-all exchange. outgoing[d] is the table addressed to rank d. The
/// result is the concatenation of what every source sent to this rank, in
/// ascending source rank; the self-addressed table is moved without
/// serialization. Collective: every rank must call it in the same superstep.
Table all_to_all(WorkerContext& ctx, std::span<const Table> outgoing);

/// Collects every rank's table at `root` in ascending rank order. Non-root
/// ranks get std::nullopt.
std::optional<Table> gather(WorkerContext& ctx, const Table& table, size_t root);

}  // namespace tessera::comm
