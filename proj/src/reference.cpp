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

#include "tessera/reference.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "tessera/row_key.hpp"

namespace tessera::reference {

namespace {

bool any_null(const Table& t, size_t row, std::span<const size_t> cols) {
  for (size_t c : cols) {
    if (!t.column(c).is_valid(row)) return true;
  }
  return false;
}

}  // namespace

Table nested_loop_join(const Table& left, const Table& right, const JoinConfig& cfg) {
  validate_join(left, right, cfg);
  std::vector<int64_t> lo, ro;
  std::vector<bool> right_hit(right.num_rows(), false);
  const bool keep_l = cfg.join_type == JoinType::Left || cfg.join_type == JoinType::FullOuter;
  const bool keep_r = cfg.join_type == JoinType::Right || cfg.join_type == JoinType::FullOuter;
  for (size_t l = 0; l < left.num_rows(); ++l) {
    bool hit = false;
    if (!any_null(left, l, cfg.left_keys)) {
      const RowKey lk = encode_row(left, l, cfg.left_keys);
      for (size_t r = 0; r < right.num_rows(); ++r) {
        if (any_null(right, r, cfg.right_keys)) continue;
        if (encode_row(right, r, cfg.right_keys) == lk) {
          lo.push_back(static_cast<int64_t>(l));
          ro.push_back(static_cast<int64_t>(r));
          hit = true;
          right_hit[r] = true;
        }
      }
    }
    if (!hit && keep_l) {
      lo.push_back(static_cast<int64_t>(l));
      ro.push_back(kNullRow);
    }
  }
  if (keep_r) {
    for (size_t r = 0; r < right.num_rows(); ++r) {
      if (!right_hit[r]) {
        lo.push_back(kNullRow);
        ro.push_back(static_cast<int64_t>(r));
      }
    }
  }
  return hstack(take_rows_or_null(left, lo), take_rows_or_null(right, ro));
}

Table ordered_map_join(const Table& left, const Table& right, const JoinConfig& cfg) {
  validate_join(left, right, cfg);
  std::map<std::string, std::vector<int64_t>> groups;
  for (size_t r = 0; r < right.num_rows(); ++r) {
    if (!any_null(right, r, cfg.right_keys)) {
      groups[encode_row(right, r, cfg.right_keys).bytes].push_back(static_cast<int64_t>(r));
    }
  }
  std::vector<int64_t> lo, ro;
  std::vector<bool> right_hit(right.num_rows(), false);
  const bool keep_l = cfg.join_type == JoinType::Left || cfg.join_type == JoinType::FullOuter;
  const bool keep_r = cfg.join_type == JoinType::Right || cfg.join_type == JoinType::FullOuter;
  for (size_t l = 0; l < left.num_rows(); ++l) {
    const std::vector<int64_t>* hits = nullptr;
    if (!any_null(left, l, cfg.left_keys)) {
      auto it = groups.find(encode_row(left, l, cfg.left_keys).bytes);
      if (it != groups.end()) hits = &it->second;
    }
    if (hits) {
      for (int64_t r : *hits) {
        lo.push_back(static_cast<int64_t>(l));
        ro.push_back(r);
        right_hit[static_cast<size_t>(r)] = true;
      }
    } else if (keep_l) {
      lo.push_back(static_cast<int64_t>(l));
      ro.push_back(kNullRow);
    }
  }
  if (keep_r) {
    for (size_t r = 0; r < right.num_rows(); ++r) {
      if (!right_hit[r]) {
        lo.push_back(kNullRow);
        ro.push_back(static_cast<int64_t>(r));
      }
    }
  }
  return hstack(take_rows_or_null(left, lo), take_rows_or_null(right, ro));
}

namespace {

// First occurrence of every distinct full row.
std::map<std::string, uint64_t> distinct_rows(const Table& t) {
  std::map<std::string, uint64_t> out;
  const auto cols = all_columns(t);
  for (size_t r = 0; r < t.num_rows(); ++r) out.emplace(encode_row(t, r, cols).bytes, r);
  return out;
}

void require_same_types(const Table& a, const Table& b) {
  if (!a.schema().same_types(b.schema())) throw SchemaMismatch("set operator inputs have different dtypes");
}

}  // namespace

Table set_union(const Table& a, const Table& b) {
  require_same_types(a, b);
  const Table both = concat({a, b});
  std::vector<uint64_t> idx;
  for (const auto& [key, row] : distinct_rows(both)) idx.push_back(row);
  return take_rows(both, idx);
}

Table set_intersect(const Table& a, const Table& b) {
  require_same_types(a, b);
  const auto in_b = distinct_rows(b);
  std::vector<uint64_t> idx;
  for (const auto& [key, row] : distinct_rows(a)) {
    if (in_b.contains(key)) idx.push_back(row);
  }
  return take_rows(a, idx);
}

Table set_difference(const Table& a, const Table& b) {
  require_same_types(a, b);
  const auto da = distinct_rows(a);
  const auto db = distinct_rows(b);
  std::vector<uint64_t> ia, ib;
  for (const auto& [key, row] : da) {
    if (!db.contains(key)) ia.push_back(row);
  }
  for (const auto& [key, row] : db) {
    if (!da.contains(key)) ib.push_back(row);
  }
  return concat({take_rows(a, ia), Table(a.schema(), take_rows(b, ib).columns())});
}

Table row_select(const Table& table, const Predicate& pred) {
  pred.validate(table.schema());
  std::vector<uint64_t> idx;
  for (size_t r = 0; r < table.num_rows(); ++r) {
    if (pred.evaluate(table, r)) idx.push_back(r);
  }
  return take_rows(table, idx);
}

Table row_project(const Table& table, std::span<const size_t> columns) {
  if (columns.empty()) throw InvalidArgument("project: empty column selection");
  std::vector<Field> fields;
  std::vector<ColumnBuilder> builders;
  for (size_t c : columns) {
    fields.push_back(table.schema().field(c));
    builders.emplace_back(table.schema().field(c).dtype);
  }
  for (size_t r = 0; r < table.num_rows(); ++r) {
    for (size_t i = 0; i < columns.size(); ++i) builders[i].append(table.value_at(r, columns[i]));
  }
  std::vector<Column> cols;
  for (auto& b : builders) cols.push_back(b.finish());
  return Table(Schema(std::move(fields)), std::move(cols));
}

std::vector<std::string> canonical_rows(const Table& table) {
  const auto cols = all_columns(table);
  std::vector<std::string> out;
  out.reserve(table.num_rows());
  for (size_t r = 0; r < table.num_rows(); ++r) out.push_back(encode_row(table, r, cols).bytes);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Renders canonical row bytes back into values for diagnostics.
std::string describe(const Table& t, const std::string& key) {
  const auto cols = all_columns(t);
  for (size_t r = 0; r < t.num_rows(); ++r) {
    if (encode_row(t, r, cols).bytes == key) {
      std::string s = "(";
      for (size_t c = 0; c < t.num_columns(); ++c) {
        if (c) s += ", ";
        s += format_value(t.value_at(r, c));
      }
      return s + ")";
    }
  }
  return "<row>";
}

}  // namespace

std::optional<Mismatch> compare_multisets(const Table& expected, const Table& actual) {
  if (!expected.schema().same_types(actual.schema())) {
    return Mismatch{expected.num_rows(), actual.num_rows(), 0, "column dtypes differ"};
  }
  const auto e = canonical_rows(expected);
  const auto a = canonical_rows(actual);
  if (e == a) return std::nullopt;
  size_t i = 0;
  while (i < e.size() && i < a.size() && e[i] == a[i]) ++i;
  std::string detail;
  if (i < e.size() && (i >= a.size() || e[i] < a[i])) {
    detail = "expected row " + describe(expected, e[i]) + " missing from output";
  } else {
    detail = "unexpected output row " + describe(actual, a[i]);
  }
  return Mismatch{e.size(), a.size(), i, detail};
}

}  // namespace tessera::reference
