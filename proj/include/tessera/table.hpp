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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tessera/error.hpp"

namespace tessera {

enum class DType : uint8_t { Int64 = 0, Float64 = 1, Utf8 = 2, Bool = 3 };

std::string_view dtype_name(DType dtype);
/// Parses "int64", "float64", "utf8" / "string", "bool" (case-insensitive).
DType parse_dtype(std::string_view name);

struct Field {
  std::string name;
  DType dtype;

  bool operator==(const Field&) const = default;
};

/// Ordered list of fields. Names may repeat; position is the identity.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<Field> fields) : fields_(std::move(fields)) {}

  size_t num_fields() const { return fields_.size(); }
  const Field& field(size_t i) const;
  const std::vector<Field>& fields() const { return fields_; }

  /// True when both schemas have the same dtype sequence (names ignored).
  bool same_types(const Schema& other) const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<Field> fields_;
};

/// A single cell. std::monostate is null.
using Value = std::variant<std::monostate, int64_t, double, std::string, bool>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// LSB-first validity bits; a set bit means the slot holds a value.
class Bitmap {
 public:
  Bitmap() = default;
  explicit Bitmap(size_t length, bool value = true);
  Bitmap(std::vector<uint8_t> bytes, size_t length);

  size_t length() const { return length_; }
  bool get(size_t i) const { return (bytes_[i >> 3] >> (i & 7)) & 1U; }
  void set(size_t i, bool value);
  void push_back(bool value);
  size_t count_set() const;
  std::span<const uint8_t> bytes() const { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
  size_t length_ = 0;
};

/// Contiguous, homogeneously typed values plus validity bits. Immutable; copies
/// share the underlying buffers.
class Column {
 public:
  static Column from_int64(std::vector<int64_t> values, Bitmap validity);
  static Column from_float64(std::vector<double> values, Bitmap validity);
  static Column from_bool(std::vector<uint8_t> values, Bitmap validity);
  /// offsets must have values_count + 1 entries, start at 0, be non-decreasing and end at data.size().
  static Column from_utf8(std::vector<uint64_t> offsets, std::string data, Bitmap validity);

  DType dtype() const { return data_->dtype; }
  size_t length() const { return data_->validity.length(); }
  size_t null_count() const { return length() - data_->validity.count_set(); }

  bool is_valid(size_t i) const { return data_->validity.get(i); }
  const Bitmap& validity() const { return data_->validity; }

  int64_t int64_at(size_t i) const { return data_->int64s[i]; }
  double float64_at(size_t i) const { return data_->float64s[i]; }
  bool bool_at(size_t i) const { return data_->bools[i] != 0; }
  std::string_view utf8_at(size_t i) const {
    const auto& o = data_->offsets;
    return std::string_view(data_->chars).substr(o[i], o[i + 1] - o[i]);
  }

  std::span<const int64_t> int64_values() const { return data_->int64s; }
  std::span<const double> float64_values() const { return data_->float64s; }
  std::span<const uint8_t> bool_values() const { return data_->bools; }
  std::span<const uint64_t> utf8_offsets() const { return data_->offsets; }
  std::string_view utf8_data() const { return data_->chars; }

  Value value_at(size_t i) const;

 private:
  struct Data {
    DType dtype;
    Bitmap validity;
    std::vector<int64_t> int64s;
    std::vector<double> float64s;
    std::vector<uint8_t> bools;
    std::vector<uint64_t> offsets;
    std::string chars;
  };
  explicit Column(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;
};

/// Appends values of one dtype and produces an immutable Column.
class ColumnBuilder {
 public:
  explicit ColumnBuilder(DType dtype);

  DType dtype() const { return dtype_; }
  size_t length() const { return validity_.length(); }
  void reserve(size_t n);

  void append_null();
  void append_int64(int64_t v);
  void append_float64(double v);
  void append_bool(bool v);
  void append_utf8(std::string_view v);
  /// Appends a Value; the alternative must match the builder dtype (Int64 values
  /// are accepted by Float64 builders).
  void append(const Value& v);
  /// Appends row `i` of `src`, which must have the same dtype.
  void append_from(const Column& src, size_t i);

  Column finish();

 private:
  DType dtype_;
  Bitmap validity_;
  std::vector<int64_t> int64s_;
  std::vector<double> float64s_;
  std::vector<uint8_t> bools_;
  std::vector<uint64_t> offsets_{0};
  std::string chars_;
};

/// Immutable schema plus equal-length columns.
class Table {
 public:
  /// Throws SchemaMismatch on count/dtype mismatch or unequal column lengths.
  Table(Schema schema, std::vector<Column> columns);

  static Table empty(const Schema& schema);
  /// Row-major convenience constructor, mostly for tests and small fixtures.
  static Table from_rows(const Schema& schema, const std::vector<std::vector<Value>>& rows);

  const Schema& schema() const { return schema_; }
  size_t num_rows() const { return num_rows_; }
  size_t num_columns() const { return columns_.size(); }
  const Column& column(size_t i) const;
  const std::vector<Column>& columns() const { return columns_; }

  Value value_at(size_t row, size_t col) const { return column(col).value_at(row); }
  std::vector<Value> row(size_t row) const;

 private:
  Schema schema_;
  std::vector<Column> columns_;
  size_t num_rows_ = 0;
};

/// Row-wise concatenation. Inputs must share a dtype sequence; names come from the first table.
Table concat(std::span<const Table> tables);
Table concat(std::initializer_list<Table> tables);

/// Row i of the output is row indices[i] of the input.
Table take_rows(const Table& table, std::span<const uint64_t> indices);

/// Marks a missing row in take_rows_or_null.
inline constexpr int64_t kNullRow = -1;
/// Like take_rows, but an index of kNullRow produces an all-null row.
Table take_rows_or_null(const Table& table, std::span<const int64_t> indices);

/// Side-by-side concatenation of equal-length tables (columns of `left`, then `right`).
Table hstack(const Table& left, const Table& right);

std::string format_value(const Value& v);

}  // namespace tessera
