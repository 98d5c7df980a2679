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

#include <algorithm>
#include <numeric>
#include <queue>

#include "tessera/local_ops.hpp"
#include "tessera/row_key.hpp"

namespace tessera {

std::vector<uint64_t> sort_indices(const Table& table, std::span<const size_t> keys) {
  check_columns(table, keys, "sort_by_keys");
  std::vector<uint64_t> idx(table.num_rows());
  std::iota(idx.begin(), idx.end(), uint64_t{0});
  if (keys.empty()) return idx;

  // Single Int64 key without nulls is the common benchmark case.
  if (keys.size() == 1 && table.column(keys[0]).dtype() == DType::Int64 && table.column(keys[0]).null_count() == 0) {
    auto v = table.column(keys[0]).int64_values();
    std::stable_sort(idx.begin(), idx.end(), [&](uint64_t a, uint64_t b) { return v[a] < v[b]; });
    return idx;
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](uint64_t a, uint64_t b) { return compare_keys(table, a, keys, table, b, keys) < 0; });
  return idx;
}

Table sort_by_keys(const Table& table, std::span<const size_t> keys) {
  auto idx = sort_indices(table, keys);
  return take_rows(table, idx);
}

Table merge_sorted(std::span<const Table> tables, std::span<const size_t> keys) {
  if (tables.empty()) throw InvalidArgument("merge_sorted of zero tables");
  for (size_t t = 0; t < tables.size(); ++t) {
    if (!tables[t].schema().same_types(tables[0].schema())) {
      throw SchemaMismatch("merge_sorted: table " + std::to_string(t) + " dtypes differ from table 0");
    }
    check_columns(tables[t], keys, "merge_sorted");
    for (size_t r = 1; r < tables[t].num_rows(); ++r) {
      if (compare_keys(tables[t], r - 1, keys, tables[t], r, keys) > 0) {
        throw InvalidArgument("merge_sorted: input " + std::to_string(t) + " is not sorted at row " +
                              std::to_string(r));
      }
    }
  }
  if (tables.size() == 1) return tables[0];

  std::vector<uint64_t> base(tables.size(), 0);
  for (size_t t = 1; t < tables.size(); ++t) base[t] = base[t - 1] + tables[t - 1].num_rows();

  struct Cursor {
    size_t table;
    size_t row;
  };
  // Min-heap; ties resolve to the lower input position.
  auto after = [&](const Cursor& a, const Cursor& b) {
    auto c = compare_keys(tables[a.table], a.row, keys, tables[b.table], b.row, keys);
    if (c != 0) return c > 0;
    return a.table > b.table;
  };
  std::priority_queue<Cursor, std::vector<Cursor>, decltype(after)> heap(after);
  for (size_t t = 0; t < tables.size(); ++t) {
    if (tables[t].num_rows() > 0) heap.push({t, 0});
  }
  std::vector<uint64_t> order;
  order.reserve(base.back() + tables.back().num_rows());
  while (!heap.empty()) {
    Cursor c = heap.top();
    heap.pop();
    order.push_back(base[c.table] + c.row);
    if (c.row + 1 < tables[c.table].num_rows()) heap.push({c.table, c.row + 1});
  }
  return take_rows(concat(tables), order);
}

}  // namespace tessera
