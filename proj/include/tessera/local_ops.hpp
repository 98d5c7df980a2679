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
#include <vector>

#include "tessera/predicate.hpp"
#include "tessera/table.hpp"

namespace tessera {

enum class JoinType { Inner, Left, Right, FullOuter };
enum class JoinAlgorithm { Hash, Sort };

std::string_view join_type_name(JoinType t);
std::string_view join_algorithm_name(JoinAlgorithm a);
JoinType parse_join_type(std::string_view s);
JoinAlgorithm parse_join_algorithm(std::string_view s);

struct JoinConfig {
  JoinType join_type = JoinType::Inner;
  JoinAlgorithm algorithm = JoinAlgorithm::Hash;
  std::vector<size_t> left_keys;
  std::vector<size_t> right_keys;

  static JoinConfig inner_join(size_t left_key, size_t right_key, JoinAlgorithm algo = JoinAlgorithm::Hash) {
    return {JoinType::Inner, algo, {left_key}, {right_key}};
  }
  static JoinConfig left_join(size_t left_key, size_t right_key, JoinAlgorithm algo = JoinAlgorithm::Hash) {
    return {JoinType::Left, algo, {left_key}, {right_key}};
  }
  static JoinConfig right_join(size_t left_key, size_t right_key, JoinAlgorithm algo = JoinAlgorithm::Hash) {
    return {JoinType::Right, algo, {left_key}, {right_key}};
  }
  static JoinConfig full_outer_join(size_t left_key, size_t right_key, JoinAlgorithm algo = JoinAlgorithm::Hash) {
    return {JoinType::FullOuter, algo, {left_key}, {right_key}};
  }
};

/// Checks key counts, ranges and pairwise dtypes against the two inputs.
void validate_join(const Table& left, const Table& right, const JoinConfig& cfg);

/// Schema of a join result: left fields followed by right fields.
Schema join_output_schema(const Schema& left, const Schema& right);

/// Rows for which `pred` is true, in input order.
Table select(const Table& table, const Predicate& pred);

/// Columns in the given order; duplicates allowed.
Table project(const Table& table, std::span<const size_t> columns);

/// Stable sort by the canonical key ordering (see compare_cells).
Table sort_by_keys(const Table& table, std::span<const size_t> keys);
/// The stable sort permutation itself.
std::vector<uint64_t> sort_indices(const Table& table, std::span<const size_t> keys);

/// Stable k-way merge of individually sorted tables. Throws InvalidArgument if
/// an input is not sorted.
Table merge_sorted(std::span<const Table> tables, std::span<const size_t> keys);

/// Rows whose key contains a null never match; they surface only as outer
/// padding. Output row order is unspecified.
Table hash_join(const Table& left, const Table& right, const JoinConfig& cfg);
Table sort_join(const Table& left, const Table& right, const JoinConfig& cfg);
/// Dispatches on cfg.algorithm.
Table join(const Table& left, const Table& right, const JoinConfig& cfg);

/// One row per distinct full row of the input.
Table distinct(const Table& table);
Table union_distinct(const Table& a, const Table& b);
Table intersect_distinct(const Table& a, const Table& b);
/// Symmetric difference: distinct rows present in exactly one input. This is
/// not SQL EXCEPT, which is one-sided.
Table difference_distinct(const Table& a, const Table& b);

/// Row r goes to partition hash_row(encode_row(r, key_columns)) % num_partitions;
/// relative order is preserved inside each partition.
std::vector<Table> hash_partition(const Table& table, std::span<const size_t> key_columns, size_t num_partitions);
/// The destination partition of every row.
std::vector<uint32_t> partition_targets(const Table& table, std::span<const size_t> key_columns,
                                        size_t num_partitions);

}  // namespace tessera
