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

#include "tessera/comm/context.hpp"

#include <cctype>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "tessera/comm/frame.hpp"

namespace tessera::comm {

TransportKind parse_transport_kind(std::string_view s) {
  std::string l(s);
  for (auto& c : l) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (l == "local" || l == "inprocess" || l == "in-process" || l == "in_process") return TransportKind::InProcess;
  if (l == "tcp") return TransportKind::Tcp;
  throw InvalidArgument("unknown transport '" + std::string(s) + "' (expected local or tcp)");
}

WorkerContext::WorkerContext(std::unique_ptr<Transport> transport) : transport_(std::move(transport)) {
  if (!transport_) throw InvalidArgument("worker context needs a transport");
}

WorkerContext::~WorkerContext() {
  if (transport_) transport_->close();
}

WorkerContext init_context(const ContextConfig& config) {
  if (config.world_size == 0) throw InvalidArgument("world_size must be >= 1");
  if (config.rank >= config.world_size) {
    throw InvalidArgument("rank " + std::to_string(config.rank) + " out of range for world size " +
                          std::to_string(config.world_size));
  }
  std::unique_ptr<Transport> transport;
  switch (config.transport) {
    case TransportKind::InProcess: {
      auto hub = config.hub;
      if (!hub) {
        if (config.world_size != 1) throw InvalidArgument("in-process worlds larger than 1 need a shared hub");
        hub = std::make_shared<InProcessHub>(1, config.recv_timeout);
      }
      if (hub->world_size() != config.world_size) {
        throw InvalidArgument("hub world size " + std::to_string(hub->world_size()) + " != configured " +
                              std::to_string(config.world_size));
      }
      transport = std::make_unique<InProcessTransport>(std::move(hub), config.rank);
      break;
    }
    case TransportKind::Tcp: {
      if (config.peer_addresses.size() != config.world_size) {
        throw InvalidArgument("tcp needs exactly world_size (" + std::to_string(config.world_size) +
                              ") peer addresses, got " + std::to_string(config.peer_addresses.size()));
      }
      transport = std::make_unique<TcpTransport>(config.rank, config.peer_addresses,
                                                 TcpOptions{config.connect_timeout, config.recv_timeout});
      break;
    }
  }
  WorkerContext ctx(std::move(transport));
  ctx.barrier();
  return ctx;
}

void run_in_process(size_t world_size, const std::function<void(WorkerContext&)>& fn, Millis recv_timeout) {
  auto hub = std::make_shared<InProcessHub>(world_size, recv_timeout);
  std::mutex mu;
  std::exception_ptr first;
  auto worker = [&](size_t rank) {
    // The context outlives the catch block: detaching before the error is
    // recorded would let a peer report "disconnected" as the first failure.
    std::optional<WorkerContext> ctx;
    try {
      ContextConfig cfg;
      cfg.world_size = world_size;
      cfg.rank = rank;
      cfg.hub = hub;
      cfg.recv_timeout = recv_timeout;
      ctx.emplace(init_context(cfg));
      fn(*ctx);
    } catch (...) {
      {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
      hub->abort("worker " + std::to_string(rank) + " failed");
    }
  };
  if (world_size == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(world_size);
    for (size_t r = 0; r < world_size; ++r) threads.emplace_back(worker, r);
    for (auto& t : threads) t.join();
  }
  if (first) std::rethrow_exception(first);
}

namespace {

void check_outgoing(const WorkerContext& ctx, std::span<const Table> outgoing) {
  if (outgoing.size() != ctx.world_size()) {
    throw InvalidArgument("all_to_all: " + std::to_string(outgoing.size()) + " outgoing tables for world size " +
                          std::to_string(ctx.world_size()));
  }
  for (size_t d = 1; d < outgoing.size(); ++d) {
    if (!outgoing[d].schema().same_types(outgoing[0].schema())) {
      throw SchemaMismatch("all_to_all: outgoing table for rank " + std::to_string(d) +
                           " has a different schema than the one for rank 0");
    }
  }
}

Table decode_from(const Frame& frame, size_t src, const Schema& expected) {
  Table t = [&] {
    try {
      return deserialize_table(frame);
    } catch (const FrameError& e) {
      throw CommError("frame from rank " + std::to_string(src) + " failed to decode: " + e.what(),
                      static_cast<int>(src));
    }
  }();
  if (!t.schema().same_types(expected)) {
    throw CommError("schema mismatch: rank " + std::to_string(src) + " sent " + std::to_string(t.num_columns()) +
                        " columns with different dtypes",
                    static_cast<int>(src));
  }
  return t;
}

}  // namespace

Table all_to_all(WorkerContext& ctx, std::span<const Table> outgoing) {
  check_outgoing(ctx, outgoing);
  const size_t ws = ctx.world_size();
  const size_t me = ctx.rank();
  if (ws == 1) return outgoing[0];

  Transport& tr = ctx.transport();
  // One sender per peer so large frames cannot deadlock on full socket buffers.
  std::vector<std::thread> senders;
  std::vector<std::exception_ptr> send_errors(ws);
  senders.reserve(ws - 1);
  for (size_t k = 1; k < ws; ++k) {
    const size_t dest = (me + k) % ws;
    senders.emplace_back([&, dest] {
      try {
        tr.send_frame(dest, serialize_table(outgoing[dest]));
      } catch (...) {
        send_errors[dest] = std::current_exception();
      }
    });
  }

  std::vector<Table> parts;
  parts.reserve(ws);
  std::exception_ptr recv_error;
  try {
    for (size_t src = 0; src < ws; ++src) {
      if (src == me) {
        parts.push_back(outgoing[me]);
      } else {
        parts.push_back(decode_from(tr.recv_frame(src), src, outgoing[me].schema()));
      }
    }
  } catch (...) {
    recv_error = std::current_exception();
  }
  for (auto& t : senders) t.join();
  if (recv_error) std::rethrow_exception(recv_error);
  for (auto& e : send_errors) {
    if (e) std::rethrow_exception(e);
  }
  // The local schema wins so names stay stable regardless of who sent what.
  Table out = concat(parts);
  return Table(outgoing[me].schema(), out.columns());
}

std::optional<Table> gather(WorkerContext& ctx, const Table& table, size_t root) {
  const size_t ws = ctx.world_size();
  if (root >= ws) throw InvalidArgument("gather: root " + std::to_string(root) + " out of range");
  if (ws == 1) return table;
  if (ctx.rank() != root) {
    ctx.transport().send_frame(root, serialize_table(table));
    return std::nullopt;
  }
  std::vector<Table> parts;
  parts.reserve(ws);
  for (size_t src = 0; src < ws; ++src) {
    parts.push_back(src == root ? table : decode_from(ctx.transport().recv_frame(src), src, table.schema()));
  }
  Table out = concat(parts);
  return Table(table.schema(), out.columns());
}

}  // namespace tessera::comm
