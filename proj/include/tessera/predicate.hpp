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
#include <string>
#include <string_view>

#include "tessera/table.hpp"

namespace tessera {

/// Read-only view of one row, handed to callable predicates.
class RowView {
 public:
  RowView(const Table& table, size_t row) : table_(&table), row_(row) {}

  size_t index() const { return row_; }
  size_t num_columns() const { return table_->num_columns(); }
  bool is_null(size_t col) const { return !table_->column(col).is_valid(row_); }
  Value value(size_t col) const { return table_->value_at(row_, col); }
  const Table& table() const { return *table_; }

 private:
  const Table* table_;
  size_t row_;
};

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view compare_op_symbol(CompareOp op);

/// Row filter: a comparison expression tree (column op literal, combined with
/// and/or/not) or a host callable.
///
/// A comparison against a null cell is false, and NOT of that false is true;
/// there is no third truth value. Float64 comparisons use the canonical
/// ordering, so NaN equals NaN and sorts above every number.
class Predicate {
 public:
  using Callable = std::function<bool(const RowView&)>;

  static Predicate constant(bool value);
  static Predicate compare(size_t column, CompareOp op, Value literal);
  static Predicate callable(Callable fn);

  friend Predicate operator&&(Predicate a, Predicate b);
  friend Predicate operator||(Predicate a, Predicate b);
  friend Predicate operator!(Predicate a);

  /// Throws if a referenced column is out of range or the literal cannot be
  /// compared with the column dtype.
  void validate(const Schema& schema) const;
  bool evaluate(const Table& table, size_t row) const;

  /// Highest column index referenced by comparisons, or -1 if none. Callables
  /// are opaque and do not count.
  int64_t max_column() const;
  bool has_callable() const;

  /// Parseable text form; callables print as "<callable>".
  std::string to_string() const;

  struct Node;

 private:
  explicit Predicate(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Parses expressions such as `c1 > 0.5 and not (c0 == 3 or c2 == "x")`.
/// Columns are written c<index>; literals are integers, decimals, true/false,
/// null-free double-quoted strings. `true` and `false` alone are constants.
Predicate parse_predicate(std::string_view text);

}  // namespace tessera
