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

#include <bit>
#include <string_view>
#include <unordered_set>

#include "tessera/local_ops.hpp"
#include "tessera/row_key.hpp"

namespace tessera {

namespace {

void check_same_types(const Table& a, const Table& b, std::string_view op) {
  if (!a.schema().same_types(b.schema())) {
    throw SchemaMismatch(std::string(op) + ": input dtypes differ (" + std::to_string(a.num_columns()) + " vs " +
                         std::to_string(b.num_columns()) + " columns)");
  }
}

struct KeyHash {
  const EncodedRows* rows;
  size_t operator()(size_t r) const { return static_cast<size_t>(rows->hash(r)); }
};

struct KeyEq {
  const EncodedRows* rows;
  bool operator()(size_t x, size_t y) const { return rows->key(x) == rows->key(y); }
};

using RowSet = std::unordered_set<size_t, KeyHash, KeyEq>;

// Full-row encodings of a followed by b, so one index space covers both inputs.
struct Combined {
  Table table;
  size_t a_rows;
  EncodedRows rows;

  Combined(const Table& a, const Table& b)
      : table(concat({a, b})), a_rows(a.num_rows()), rows(table, all_columns(table)) {}

  RowSet make_set() const { return RowSet(16, KeyHash{&rows}, KeyEq{&rows}); }
};

}  // namespace

Table distinct(const Table& table) {
  const EncodedRows rows(table, all_columns(table));
  RowSet seen(16, KeyHash{&rows}, KeyEq{&rows});
  seen.reserve(table.num_rows());
  std::vector<uint64_t> keep;
  for (size_t r = 0; r < table.num_rows(); ++r) {
    if (seen.insert(r).second) keep.push_back(r);
  }
  if (keep.size() == table.num_rows()) return table;
  return take_rows(table, keep);
}

Table union_distinct(const Table& a, const Table& b) {
  check_same_types(a, b, "union");
  Combined all(a, b);
  RowSet seen = all.make_set();
  seen.reserve(all.table.num_rows());
  std::vector<uint64_t> keep;
  for (size_t r = 0; r < all.table.num_rows(); ++r) {
    if (seen.insert(r).second) keep.push_back(r);
  }
  return take_rows(all.table, keep);
}

Table intersect_distinct(const Table& a, const Table& b) {
  check_same_types(a, b, "intersect");
  Combined all(a, b);
  RowSet in_b = all.make_set();
  in_b.reserve(b.num_rows());
  for (size_t r = all.a_rows; r < all.table.num_rows(); ++r) in_b.insert(r);
  RowSet emitted = all.make_set();
  std::vector<uint64_t> keep;
  for (size_t r = 0; r < all.a_rows; ++r) {
    if (in_b.contains(r) && emitted.insert(r).second) keep.push_back(r);
  }
  return take_rows(all.table, keep);
}

Table difference_distinct(const Table& a, const Table& b) {
  check_same_types(a, b, "difference");
  Combined all(a, b);
  RowSet in_a = all.make_set();
  RowSet in_b = all.make_set();
  in_a.reserve(a.num_rows());
  in_b.reserve(b.num_rows());
  for (size_t r = 0; r < all.a_rows; ++r) in_a.insert(r);
  for (size_t r = all.a_rows; r < all.table.num_rows(); ++r) in_b.insert(r);
  RowSet emitted = all.make_set();
  std::vector<uint64_t> keep;
  for (size_t r = 0; r < all.table.num_rows(); ++r) {
    const bool from_a = r < all.a_rows;
    const bool in_other = from_a ? in_b.contains(r) : in_a.contains(r);
    if (!in_other && emitted.insert(r).second) keep.push_back(r);
  }
  return take_rows(all.table, keep);
}

std::vector<uint32_t> partition_targets(const Table& table, std::span<const size_t> key_columns,
                                        size_t num_partitions) {
  if (num_partitions == 0) throw InvalidArgument("hash_partition: num_partitions must be >= 1");
  check_columns(table, key_columns, "hash_partition");
  std::vector<uint32_t> out(table.num_rows());
  std::string buf;
  for (size_t r = 0; r < table.num_rows(); ++r) {
    buf.clear();
    append_row_encoding(table, r, key_columns, buf);
    out[r] = static_cast<uint32_t>(fnv1a(buf) % num_partitions);
  }
  return out;
}

std::vector<Table> hash_partition(const Table& table, std::span<const size_t> key_columns, size_t num_partitions) {
  const auto targets = partition_targets(table, key_columns, num_partitions);
  if (num_partitions == 1) return {table};
  std::vector<std::vector<uint64_t>> rows(num_partitions);
  for (size_t r = 0; r < targets.size(); ++r) rows[targets[r]].push_back(r);
  std::vector<Table> out;
  out.reserve(num_partitions);
  for (const auto& idx : rows) out.push_back(take_rows(table, idx));
  return out;
}

}  // namespace tessera
