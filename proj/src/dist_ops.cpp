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

#include "tessera/dist_ops.hpp"

#include "tessera/row_key.hpp"

namespace tessera {

namespace {

comm::WorkerContext& same_context(const DistributedTable& a, const DistributedTable& b, const char* op) {
  if (a.ctx == nullptr || a.ctx != b.ctx) {
    throw InvalidArgument(std::string(op) + ": inputs must live on the same worker context");
  }
  return *a.ctx;
}

template <typename LocalOp>
DistributedTable shuffled_set_op(const DistributedTable& a, const DistributedTable& b, const char* name,
                                 LocalOp op) {
  auto& ctx = same_context(a, b, name);
  if (!a.local.schema().same_types(b.local.schema())) {
    throw SchemaMismatch(std::string(name) + ": input dtypes differ");
  }
  const auto cols = all_columns(a.local);
  Table a_recv = shuffle(ctx, a.local, cols);
  Table b_recv = shuffle(ctx, b.local, cols);
  return {&ctx, op(a_recv, b_recv)};
}

}  // namespace

Table shuffle(comm::WorkerContext& ctx, const Table& local, std::span<const size_t> key_columns) {
  const auto parts = hash_partition(local, key_columns, ctx.world_size());
  return comm::all_to_all(ctx, parts);
}

DistributedTable distributed_join(const DistributedTable& left, const DistributedTable& right,
                                  const JoinConfig& cfg) {
  auto& ctx = same_context(left, right, "distributed_join");
  validate_join(left.local, right.local, cfg);
  Table l = shuffle(ctx, left.local, cfg.left_keys);
  Table r = shuffle(ctx, right.local, cfg.right_keys);
  return {&ctx, join(l, r, cfg)};
}

DistributedTable distributed_union(const DistributedTable& a, const DistributedTable& b) {
  return shuffled_set_op(a, b, "distributed_union", union_distinct);
}

DistributedTable distributed_intersect(const DistributedTable& a, const DistributedTable& b) {
  return shuffled_set_op(a, b, "distributed_intersect", intersect_distinct);
}

DistributedTable distributed_difference(const DistributedTable& a, const DistributedTable& b) {
  return shuffled_set_op(a, b, "distributed_difference", difference_distinct);
}

DistributedTable distributed_select(const DistributedTable& t, const Predicate& pred) {
  return {t.ctx, select(t.local, pred)};
}

DistributedTable distributed_project(const DistributedTable& t, std::span<const size_t> columns) {
  return {t.ctx, project(t.local, columns)};
}

}  // namespace tessera
