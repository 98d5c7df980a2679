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

#include <optional>
#include <string>
#include <vector>

#include "tessera/local_ops.hpp"
#include "tessera/table.hpp"

/// Straightforward serial implementations used to check the engine's
/// results: quadratic nested-loop join, ordered-set based set operators and a
/// row-at-a-time select/project. They share nothing with local_ops beyond the
/// row encoding and take_rows.
namespace tessera::reference {

Table nested_loop_join(const Table& left, const Table& right, const JoinConfig& cfg);
/// Same semantics as nested_loop_join, grouping the right side in an ordered
/// map so large inputs stay tractable.
Table ordered_map_join(const Table& left, const Table& right, const JoinConfig& cfg);
Table set_union(const Table& a, const Table& b);
Table set_intersect(const Table& a, const Table& b);
Table set_difference(const Table& a, const Table& b);
Table row_select(const Table& table, const Predicate& pred);
Table row_project(const Table& table, std::span<const size_t> columns);

/// Full-row RowKey bytes of every row, sorted. Two tables hold the same row
/// multiset iff their canonical forms are equal.
std::vector<std::string> canonical_rows(const Table& table);

struct Mismatch {
  size_t expected_rows;
  size_t actual_rows;
  /// Position in canonical order of the first difference.
  size_t position;
  std::string detail;
};

/// std::nullopt when `actual` and `expected` are multiset-equal.
std::optional<Mismatch> compare_multisets(const Table& expected, const Table& actual);

}  // namespace tessera::reference
