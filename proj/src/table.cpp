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

#include "tessera/table.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>

namespace tessera {

std::string_view dtype_name(DType dtype) {
  switch (dtype) {
    case DType::Int64:
      return "int64";
    case DType::Float64:
      return "float64";
    case DType::Utf8:
      return "utf8";
    case DType::Bool:
      return "bool";
  }
  return "unknown";
}

DType parse_dtype(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "int64" || lower == "int_64" || lower == "i64") return DType::Int64;
  if (lower == "float64" || lower == "double" || lower == "f64") return DType::Float64;
  if (lower == "utf8" || lower == "string" || lower == "str") return DType::Utf8;
  if (lower == "bool" || lower == "boolean") return DType::Bool;
  throw InvalidArgument("unknown dtype '" + std::string(name) + "'");
}

const Field& Schema::field(size_t i) const {
  if (i >= fields_.size()) {
    throw IndexOutOfRange("field index " + std::to_string(i) + " out of range for schema with " +
                          std::to_string(fields_.size()) + " fields");
  }
  return fields_[i];
}

bool Schema::same_types(const Schema& other) const {
  return std::equal(fields_.begin(), fields_.end(), other.fields_.begin(), other.fields_.end(),
                    [](const Field& a, const Field& b) { return a.dtype == b.dtype; });
}

// -- Bitmap -----------------------------------------------------------------

Bitmap::Bitmap(size_t length, bool value)
    : bytes_((length + 7) / 8, value ? 0xFF : 0x00), length_(length) {
  if (value && (length & 7)) bytes_.back() = static_cast<uint8_t>((1U << (length & 7)) - 1);
}

Bitmap::Bitmap(std::vector<uint8_t> bytes, size_t length) : bytes_(std::move(bytes)), length_(length) {
  if (bytes_.size() != (length + 7) / 8) {
    throw InvalidArgument("bitmap of " + std::to_string(length) + " bits needs " +
                          std::to_string((length + 7) / 8) + " bytes, got " + std::to_string(bytes_.size()));
  }
  // Padding bits are always clear so equal bitmaps have equal bytes.
  if (length & 7) bytes_.back() &= static_cast<uint8_t>((1U << (length & 7)) - 1);
}

void Bitmap::set(size_t i, bool value) {
  if (value) {
    bytes_[i >> 3] |= static_cast<uint8_t>(1U << (i & 7));
  } else {
    bytes_[i >> 3] &= static_cast<uint8_t>(~(1U << (i & 7)));
  }
}

void Bitmap::push_back(bool value) {
  if ((length_ & 7) == 0) bytes_.push_back(0);
  ++length_;
  set(length_ - 1, value);
}

size_t Bitmap::count_set() const {
  size_t n = 0;
  for (uint8_t b : bytes_) n += static_cast<size_t>(std::popcount(b));
  return n;
}

// -- Column -----------------------------------------------------------------

Column Column::from_int64(std::vector<int64_t> values, Bitmap validity) {
  if (values.size() != validity.length()) throw SchemaMismatch("int64 column: validity length != values length");
  auto d = std::make_shared<Data>();
  d->dtype = DType::Int64;
  d->validity = std::move(validity);
  d->int64s = std::move(values);
  return Column(std::move(d));
}

Column Column::from_float64(std::vector<double> values, Bitmap validity) {
  if (values.size() != validity.length()) throw SchemaMismatch("float64 column: validity length != values length");
  auto d = std::make_shared<Data>();
  d->dtype = DType::Float64;
  d->validity = std::move(validity);
  d->float64s = std::move(values);
  return Column(std::move(d));
}

Column Column::from_bool(std::vector<uint8_t> values, Bitmap validity) {
  if (values.size() != validity.length()) throw SchemaMismatch("bool column: validity length != values length");
  for (auto& v : values) v = v ? 1 : 0;
  auto d = std::make_shared<Data>();
  d->dtype = DType::Bool;
  d->validity = std::move(validity);
  d->bools = std::move(values);
  return Column(std::move(d));
}

Column Column::from_utf8(std::vector<uint64_t> offsets, std::string data, Bitmap validity) {
  if (offsets.size() != validity.length() + 1) throw SchemaMismatch("utf8 column: offsets length != length + 1");
  if (offsets.front() != 0) throw InvalidArgument("utf8 column: offsets[0] must be 0");
  if (!std::is_sorted(offsets.begin(), offsets.end())) throw InvalidArgument("utf8 column: offsets not monotone");
  if (offsets.back() != data.size()) throw InvalidArgument("utf8 column: last offset != data size");
  auto d = std::make_shared<Data>();
  d->dtype = DType::Utf8;
  d->validity = std::move(validity);
  d->offsets = std::move(offsets);
  d->chars = std::move(data);
  return Column(std::move(d));
}

Value Column::value_at(size_t i) const {
  if (i >= length()) throw IndexOutOfRange("row " + std::to_string(i) + " out of range");
  if (!is_valid(i)) return std::monostate{};
  switch (dtype()) {
    case DType::Int64:
      return int64_at(i);
    case DType::Float64:
      return float64_at(i);
    case DType::Utf8:
      return std::string(utf8_at(i));
    case DType::Bool:
      return bool_at(i);
  }
  return std::monostate{};
}

// -- ColumnBuilder ----------------------------------------------------------

ColumnBuilder::ColumnBuilder(DType dtype) : dtype_(dtype) {}

void ColumnBuilder::reserve(size_t n) {
  switch (dtype_) {
    case DType::Int64:
      int64s_.reserve(n);
      break;
    case DType::Float64:
      float64s_.reserve(n);
      break;
    case DType::Utf8:
      offsets_.reserve(n + 1);
      break;
    case DType::Bool:
      bools_.reserve(n);
      break;
  }
}

void ColumnBuilder::append_null() {
  validity_.push_back(false);
  switch (dtype_) {
    case DType::Int64:
      int64s_.push_back(0);
      break;
    case DType::Float64:
      float64s_.push_back(0.0);
      break;
    case DType::Utf8:
      offsets_.push_back(chars_.size());
      break;
    case DType::Bool:
      bools_.push_back(0);
      break;
  }
}

void ColumnBuilder::append_int64(int64_t v) {
  if (dtype_ != DType::Int64) throw SchemaMismatch("append_int64 on " + std::string(dtype_name(dtype_)) + " builder");
  validity_.push_back(true);
  int64s_.push_back(v);
}

void ColumnBuilder::append_float64(double v) {
  if (dtype_ != DType::Float64) {
    throw SchemaMismatch("append_float64 on " + std::string(dtype_name(dtype_)) + " builder");
  }
  validity_.push_back(true);
  float64s_.push_back(v);
}

void ColumnBuilder::append_bool(bool v) {
  if (dtype_ != DType::Bool) throw SchemaMismatch("append_bool on " + std::string(dtype_name(dtype_)) + " builder");
  validity_.push_back(true);
  bools_.push_back(v ? 1 : 0);
}

void ColumnBuilder::append_utf8(std::string_view v) {
  if (dtype_ != DType::Utf8) throw SchemaMismatch("append_utf8 on " + std::string(dtype_name(dtype_)) + " builder");
  validity_.push_back(true);
  chars_.append(v);
  offsets_.push_back(chars_.size());
}

void ColumnBuilder::append(const Value& v) {
  struct Visitor {
    ColumnBuilder& b;
    void operator()(std::monostate) { b.append_null(); }
    void operator()(int64_t x) {
      if (b.dtype_ == DType::Float64) {
        b.append_float64(static_cast<double>(x));
      } else {
        b.append_int64(x);
      }
    }
    void operator()(double x) { b.append_float64(x); }
    void operator()(const std::string& x) { b.append_utf8(x); }
    void operator()(bool x) { b.append_bool(x); }
  };
  std::visit(Visitor{*this}, v);
}

void ColumnBuilder::append_from(const Column& src, size_t i) {
  if (!src.is_valid(i)) {
    append_null();
    return;
  }
  switch (dtype_) {
    case DType::Int64:
      append_int64(src.int64_at(i));
      break;
    case DType::Float64:
      append_float64(src.float64_at(i));
      break;
    case DType::Utf8:
      append_utf8(src.utf8_at(i));
      break;
    case DType::Bool:
      append_bool(src.bool_at(i));
      break;
  }
}

Column ColumnBuilder::finish() {
  Column out = [&] {
    switch (dtype_) {
      case DType::Int64:
        return Column::from_int64(std::move(int64s_), std::move(validity_));
      case DType::Float64:
        return Column::from_float64(std::move(float64s_), std::move(validity_));
      case DType::Utf8:
        return Column::from_utf8(std::move(offsets_), std::move(chars_), std::move(validity_));
      case DType::Bool:
        break;
    }
    return Column::from_bool(std::move(bools_), std::move(validity_));
  }();
  *this = ColumnBuilder(dtype_);
  return out;
}

// -- Table ------------------------------------------------------------------

Table::Table(Schema schema, std::vector<Column> columns) : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (schema_.num_fields() == 0) throw InvalidArgument("a table needs at least one column");
  if (schema_.num_fields() != columns_.size()) {
    throw SchemaMismatch("schema has " + std::to_string(schema_.num_fields()) + " fields but " +
                         std::to_string(columns_.size()) + " columns were given");
  }
  num_rows_ = columns_.empty() ? 0 : columns_.front().length();
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].dtype() != schema_.field(i).dtype) {
      throw SchemaMismatch("column " + std::to_string(i) + " has dtype " +
                           std::string(dtype_name(columns_[i].dtype())) + ", schema says " +
                           std::string(dtype_name(schema_.field(i).dtype)));
    }
    if (columns_[i].length() != num_rows_) {
      throw SchemaMismatch("column " + std::to_string(i) + " has " + std::to_string(columns_[i].length()) +
                           " rows, expected " + std::to_string(num_rows_));
    }
  }
}

Table Table::empty(const Schema& schema) {
  std::vector<Column> cols;
  cols.reserve(schema.num_fields());
  for (const auto& f : schema.fields()) cols.push_back(ColumnBuilder(f.dtype).finish());
  return Table(schema, std::move(cols));
}

Table Table::from_rows(const Schema& schema, const std::vector<std::vector<Value>>& rows) {
  std::vector<ColumnBuilder> builders;
  for (const auto& f : schema.fields()) builders.emplace_back(f.dtype);
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.num_fields()) {
      throw SchemaMismatch("row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) + " values");
    }
    for (size_t c = 0; c < builders.size(); ++c) builders[c].append(rows[r][c]);
  }
  std::vector<Column> cols;
  for (auto& b : builders) cols.push_back(b.finish());
  return Table(schema, std::move(cols));
}

const Column& Table::column(size_t i) const {
  if (i >= columns_.size()) {
    throw IndexOutOfRange("column index " + std::to_string(i) + " out of range for table with " +
                          std::to_string(columns_.size()) + " columns");
  }
  return columns_[i];
}

std::vector<Value> Table::row(size_t r) const {
  std::vector<Value> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.value_at(r));
  return out;
}

// -- concat / take ----------------------------------------------------------

namespace {

template <typename T>
void append_span(std::vector<T>& dst, std::span<const T> src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

Column concat_columns(DType dtype, std::span<const Table> tables, size_t col, size_t total) {
  Bitmap validity;
  switch (dtype) {
    case DType::Int64: {
      std::vector<int64_t> v;
      v.reserve(total);
      for (const auto& t : tables) append_span(v, t.column(col).int64_values());
      validity = Bitmap(total);
      size_t at = 0;
      for (const auto& t : tables) {
        const auto& c = t.column(col);
        for (size_t i = 0; i < c.length(); ++i, ++at) {
          if (!c.is_valid(i)) validity.set(at, false);
        }
      }
      return Column::from_int64(std::move(v), std::move(validity));
    }
    case DType::Float64: {
      std::vector<double> v;
      v.reserve(total);
      for (const auto& t : tables) append_span(v, t.column(col).float64_values());
      validity = Bitmap(total);
      size_t at = 0;
      for (const auto& t : tables) {
        const auto& c = t.column(col);
        for (size_t i = 0; i < c.length(); ++i, ++at) {
          if (!c.is_valid(i)) validity.set(at, false);
        }
      }
      return Column::from_float64(std::move(v), std::move(validity));
    }
    case DType::Bool:
    case DType::Utf8:
      break;
  }
  ColumnBuilder b(dtype);
  b.reserve(total);
  for (const auto& t : tables) {
    const auto& c = t.column(col);
    for (size_t i = 0; i < c.length(); ++i) b.append_from(c, i);
  }
  return b.finish();
}

}  // namespace

Table concat(std::span<const Table> tables) {
  if (tables.empty()) throw InvalidArgument("concat of zero tables");
  const Schema& schema = tables.front().schema();
  size_t total = 0;
  for (size_t i = 0; i < tables.size(); ++i) {
    if (!tables[i].schema().same_types(schema)) {
      throw SchemaMismatch("concat: table " + std::to_string(i) + " dtypes differ from table 0");
    }
    total += tables[i].num_rows();
  }
  if (tables.size() == 1) return tables.front();
  std::vector<Column> cols;
  cols.reserve(schema.num_fields());
  for (size_t c = 0; c < schema.num_fields(); ++c) {
    cols.push_back(concat_columns(schema.field(c).dtype, tables, c, total));
  }
  return Table(schema, std::move(cols));
}

Table concat(std::initializer_list<Table> tables) {
  return concat(std::span<const Table>(tables.begin(), tables.size()));
}

namespace {

template <typename Index, typename IsNull, typename ToRow>
Column take_column(const Column& c, std::span<const Index> indices, IsNull is_null_row, ToRow to_row) {
  const size_t n = indices.size();
  Bitmap validity(n);
  for (size_t i = 0; i < n; ++i) {
    if (is_null_row(indices[i]) || !c.is_valid(to_row(indices[i]))) validity.set(i, false);
  }
  switch (c.dtype()) {
    case DType::Int64: {
      std::vector<int64_t> v(n);
      auto src = c.int64_values();
      for (size_t i = 0; i < n; ++i) v[i] = validity.get(i) ? src[to_row(indices[i])] : 0;
      return Column::from_int64(std::move(v), std::move(validity));
    }
    case DType::Float64: {
      std::vector<double> v(n);
      auto src = c.float64_values();
      for (size_t i = 0; i < n; ++i) v[i] = validity.get(i) ? src[to_row(indices[i])] : 0.0;
      return Column::from_float64(std::move(v), std::move(validity));
    }
    case DType::Bool: {
      std::vector<uint8_t> v(n);
      auto src = c.bool_values();
      for (size_t i = 0; i < n; ++i) v[i] = validity.get(i) ? src[to_row(indices[i])] : 0;
      return Column::from_bool(std::move(v), std::move(validity));
    }
    case DType::Utf8: {
      std::vector<uint64_t> offsets(n + 1);
      size_t bytes = 0;
      for (size_t i = 0; i < n; ++i) {
        if (validity.get(i)) bytes += c.utf8_at(to_row(indices[i])).size();
      }
      std::string data;
      data.reserve(bytes);
      for (size_t i = 0; i < n; ++i) {
        if (validity.get(i)) data.append(c.utf8_at(to_row(indices[i])));
        offsets[i + 1] = data.size();
      }
      return Column::from_utf8(std::move(offsets), std::move(data), std::move(validity));
    }
  }
  throw InvalidArgument("unknown dtype");
}

}  // namespace

Table take_rows(const Table& table, std::span<const uint64_t> indices) {
  for (uint64_t idx : indices) {
    if (idx >= table.num_rows()) {
      throw IndexOutOfRange("take_rows: index " + std::to_string(idx) + " out of range for " +
                            std::to_string(table.num_rows()) + " rows");
    }
  }
  std::vector<Column> cols;
  cols.reserve(table.num_columns());
  for (const auto& c : table.columns()) {
    cols.push_back(take_column<uint64_t>(
        c, indices, [](uint64_t) { return false; }, [](uint64_t i) { return static_cast<size_t>(i); }));
  }
  return Table(table.schema(), std::move(cols));
}

Table take_rows_or_null(const Table& table, std::span<const int64_t> indices) {
  for (int64_t idx : indices) {
    if (idx != kNullRow && (idx < 0 || static_cast<uint64_t>(idx) >= table.num_rows())) {
      throw IndexOutOfRange("take_rows: index " + std::to_string(idx) + " out of range for " +
                            std::to_string(table.num_rows()) + " rows");
    }
  }
  std::vector<Column> cols;
  cols.reserve(table.num_columns());
  for (const auto& c : table.columns()) {
    cols.push_back(take_column<int64_t>(
        c, indices, [](int64_t i) { return i == kNullRow; }, [](int64_t i) { return static_cast<size_t>(i); }));
  }
  return Table(table.schema(), std::move(cols));
}

Table hstack(const Table& left, const Table& right) {
  if (left.num_rows() != right.num_rows()) {
    throw SchemaMismatch("hstack: row counts differ (" + std::to_string(left.num_rows()) + " vs " +
                         std::to_string(right.num_rows()) + ")");
  }
  auto fields = left.schema().fields();
  fields.insert(fields.end(), right.schema().fields().begin(), right.schema().fields().end());
  auto cols = left.columns();
  cols.insert(cols.end(), right.columns().begin(), right.columns().end());
  return Table(Schema(std::move(fields)), std::move(cols));
}

std::string format_value(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "null"; }
    std::string operator()(int64_t x) const { return std::to_string(x); }
    std::string operator()(double x) const {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof(buf), x);
      return std::string(buf, res.ptr);
    }
    std::string operator()(const std::string& x) const { return "\"" + x + "\""; }
    std::string operator()(bool x) const { return x ? "true" : "false"; }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace tessera
