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

#include <span>

#include "tessera/comm/context.hpp"
#include "tessera/local_ops.hpp"

namespace tessera {

/// One worker's partition of a logical table. The logical table is the
/// multiset union of every worker's `local`; there is no global order.
struct DistributedTable {
  comm::WorkerContext* ctx;
  Table local;
};

/// Hash-partitions both sides on their join keys, exchanges them with
/// all_to_all and joins the received partitions locally with cfg.algorithm.
DistributedTable distributed_join(const DistributedTable& left, const DistributedTable& right,
                                  const JoinConfig& cfg);

/// Set operators shuffle both inputs on all columns so equal rows co-locate,
/// then run the local operator.
DistributedTable distributed_union(const DistributedTable& a, const DistributedTable& b);
DistributedTable distributed_intersect(const DistributedTable& a, const DistributedTable& b);
DistributedTable distributed_difference(const DistributedTable& a, const DistributedTable& b);

/// Purely local; no frames are sent.
DistributedTable distributed_select(const DistributedTable& t, const Predicate& pred);
DistributedTable distributed_project(const DistributedTable& t, std::span<const size_t> columns);

/// Shuffle step shared by the operators above: partition `local` on
/// `key_columns` into world_size pieces and exchange them.
Table shuffle(comm::WorkerContext& ctx, const Table& local, std::span<const size_t> key_columns);

}  // namespace tessera
