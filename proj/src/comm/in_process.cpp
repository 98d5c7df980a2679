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

#include "tessera/comm/transport.hpp"

namespace tessera::comm {

InProcessHub::InProcessHub(size_t world_size, Millis recv_timeout)
    : world_size_(world_size), recv_timeout_(recv_timeout), attached_(world_size, 0), closed_(world_size, 0) {
  if (world_size == 0) throw InvalidArgument("world_size must be >= 1");
  boxes_.reserve(world_size * world_size);
  for (size_t i = 0; i < world_size * world_size; ++i) boxes_.push_back(std::make_unique<Mailbox>());
}

void InProcessHub::abort(const std::string& reason) {
  {
    std::lock_guard lock(mu_);
    if (aborted_) return;
    aborted_ = true;
    abort_reason_ = reason;
  }
  cv_.notify_all();
  for (auto& b : boxes_) {
    std::lock_guard lock(b->mu);
    b->cv.notify_all();
  }
}

bool InProcessHub::aborted() const {
  std::lock_guard lock(mu_);
  return aborted_;
}

void InProcessHub::check_abort_locked() const {
  if (aborted_) throw CommError("in-process world aborted: " + abort_reason_);
}

void InProcessHub::attach(size_t rank) {
  std::lock_guard lock(mu_);
  if (rank >= world_size_) {
    throw CommError("rank " + std::to_string(rank) + " out of range for world size " + std::to_string(world_size_));
  }
  if (attached_[rank]) throw CommError("rank collision: rank " + std::to_string(rank) + " attached twice", static_cast<int>(rank));
  attached_[rank] = 1;
}

void InProcessHub::detach(size_t rank) {
  {
    std::lock_guard lock(mu_);
    closed_[rank] = 1;
  }
  cv_.notify_all();
  for (size_t dest = 0; dest < world_size_; ++dest) {
    auto& b = box(rank, dest);
    std::lock_guard lock(b.mu);
    b.cv.notify_all();
  }
}

bool InProcessHub::closed(size_t rank) {
  std::lock_guard lock(mu_);
  return closed_[rank] != 0;
}

InProcessTransport::InProcessTransport(std::shared_ptr<InProcessHub> hub, size_t rank)
    : hub_(std::move(hub)), rank_(rank) {
  if (!hub_) throw InvalidArgument("in-process transport needs a hub");
  hub_->attach(rank);
}

InProcessTransport::~InProcessTransport() { close(); }

void InProcessTransport::send_frame(size_t dest, Frame bytes) {
  if (closed_) throw CommError("send on closed transport", static_cast<int>(dest));
  if (dest >= world_size()) throw CommError("send to invalid rank " + std::to_string(dest), static_cast<int>(dest));
  if (bytes.empty()) throw CommError("empty frames are not allowed", static_cast<int>(dest));
  if (hub_->aborted()) throw CommError("in-process world aborted", static_cast<int>(dest));
  count_sent(bytes.size());
  auto& b = hub_->box(rank_, dest);
  {
    std::lock_guard lock(b.mu);
    b.frames.push_back(std::move(bytes));
  }
  b.cv.notify_all();
}

Frame InProcessTransport::recv_frame(size_t src) {
  if (src >= world_size()) throw CommError("receive from invalid rank " + std::to_string(src), static_cast<int>(src));
  auto& b = hub_->box(src, rank_);
  std::unique_lock lock(b.mu);
  const auto deadline = std::chrono::steady_clock::now() + hub_->recv_timeout_;
  for (;;) {
    if (!b.frames.empty()) {
      Frame f = std::move(b.frames.front());
      b.frames.pop_front();
      return f;
    }
    if (hub_->aborted()) throw CommError("in-process world aborted while receiving from rank " + std::to_string(src), static_cast<int>(src));
    if (hub_->closed(src)) throw CommError("peer rank " + std::to_string(src) + " disconnected", static_cast<int>(src));
    if (b.cv.wait_until(lock, deadline) == std::cv_status::timeout && b.frames.empty()) {
      throw CommError("timed out receiving from rank " + std::to_string(src), static_cast<int>(src));
    }
  }
}

void InProcessTransport::barrier() {
  auto& h = *hub_;
  std::unique_lock lock(h.mu_);
  h.check_abort_locked();
  const uint64_t gen = h.barrier_generation_;
  if (++h.barrier_count_ == h.world_size_) {
    h.barrier_count_ = 0;
    ++h.barrier_generation_;
    lock.unlock();
    h.cv_.notify_all();
    return;
  }
  const auto deadline = std::chrono::steady_clock::now() + h.recv_timeout_;
  for (;;) {
    if (h.barrier_generation_ != gen) return;
    h.check_abort_locked();
    for (size_t r = 0; r < h.world_size_; ++r) {
      if (h.closed_[r]) throw CommError("barrier: peer rank " + std::to_string(r) + " disconnected", static_cast<int>(r));
    }
    if (h.cv_.wait_until(lock, deadline) == std::cv_status::timeout && h.barrier_generation_ == gen) {
      throw CommError("barrier timed out");
    }
  }
}

void InProcessTransport::close() {
  if (closed_) return;
  closed_ = true;
  hub_->detach(rank_);
}

}  // namespace tessera::comm
