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

#include "tessera/row_key.hpp"

#include <bit>
#include <cmath>
#include <numeric>

namespace tessera {

namespace {

void put_u64_le(std::string& out, uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.append(buf, 8);
}

void put_u32_le(std::string& out, uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.append(buf, 4);
}

void append_cell(const Column& c, size_t row, std::string& out) {
  if (!c.is_valid(row)) {
    out.push_back('\x00');
    return;
  }
  out.push_back('\x01');
  out.push_back(static_cast<char>(c.dtype()));
  switch (c.dtype()) {
    case DType::Int64:
      put_u64_le(out, static_cast<uint64_t>(c.int64_at(row)));
      break;
    case DType::Float64:
      put_u64_le(out, normalized_float_bits(c.float64_at(row)));
      break;
    case DType::Bool:
      out.push_back(c.bool_at(row) ? '\x01' : '\x00');
      break;
    case DType::Utf8: {
      auto s = c.utf8_at(row);
      put_u32_le(out, static_cast<uint32_t>(s.size()));
      out.append(s);
      break;
    }
  }
}

}  // namespace

uint64_t normalized_float_bits(double v) {
  if (std::isnan(v)) return kNormalizedNaNBits;
  if (v == 0.0) return 0;
  return std::bit_cast<uint64_t>(v);
}

void check_columns(const Table& table, std::span<const size_t> columns, std::string_view what) {
  for (size_t c : columns) {
    if (c >= table.num_columns()) {
      throw IndexOutOfRange(std::string(what) + ": column index " + std::to_string(c) + " out of range for table with " +
                            std::to_string(table.num_columns()) + " columns");
    }
  }
}

void append_row_encoding(const Table& table, size_t row_index, std::span<const size_t> column_subset,
                         std::string& out) {
  for (size_t c : column_subset) append_cell(table.columns()[c], row_index, out);
}

RowKey encode_row(const Table& table, size_t row_index, std::span<const size_t> column_subset) {
  if (row_index >= table.num_rows()) {
    throw IndexOutOfRange("encode_row: row " + std::to_string(row_index) + " out of range for " +
                          std::to_string(table.num_rows()) + " rows");
  }
  check_columns(table, column_subset, "encode_row");
  RowKey key;
  append_row_encoding(table, row_index, column_subset, key.bytes);
  return key;
}

std::vector<size_t> all_columns(const Table& table) {
  std::vector<size_t> cols(table.num_columns());
  std::iota(cols.begin(), cols.end(), size_t{0});
  return cols;
}

EncodedRows::EncodedRows(const Table& table, std::span<const size_t> columns) {
  check_columns(table, columns, "encode");
  const size_t n = table.num_rows();
  offsets_.reserve(n + 1);
  offsets_.push_back(0);
  hashes_.reserve(n);
  has_null_.assign(n, 0);
  for (size_t r = 0; r < n; ++r) {
    append_row_encoding(table, r, columns, bytes_);
    offsets_.push_back(bytes_.size());
    hashes_.push_back(fnv1a(key(r)));
    for (size_t c : columns) {
      if (!table.columns()[c].is_valid(r)) {
        has_null_[r] = 1;
        break;
      }
    }
  }
}

namespace {

std::weak_ordering compare_doubles(double x, double y) {
  const bool xn = std::isnan(x);
  const bool yn = std::isnan(y);
  if (xn || yn) {
    if (xn && yn) return std::weak_ordering::equivalent;
    return xn ? std::weak_ordering::greater : std::weak_ordering::less;
  }
  if (x < y) return std::weak_ordering::less;
  if (y < x) return std::weak_ordering::greater;
  return std::weak_ordering::equivalent;
}

}  // namespace

std::weak_ordering compare_cells(const Column& a, size_t i, const Column& b, size_t j) {
  const bool av = a.is_valid(i);
  const bool bv = b.is_valid(j);
  if (!av || !bv) {
    if (av == bv) return std::weak_ordering::equivalent;
    return av ? std::weak_ordering::greater : std::weak_ordering::less;
  }
  switch (a.dtype()) {
    case DType::Int64:
      return a.int64_at(i) <=> b.int64_at(j);
    case DType::Float64:
      return compare_doubles(a.float64_at(i), b.float64_at(j));
    case DType::Bool:
      return a.bool_at(i) <=> b.bool_at(j);
    case DType::Utf8: {
      const int r = a.utf8_at(i).compare(b.utf8_at(j));
      if (r < 0) return std::weak_ordering::less;
      if (r > 0) return std::weak_ordering::greater;
      return std::weak_ordering::equivalent;
    }
  }
  return std::weak_ordering::equivalent;
}

std::weak_ordering compare_keys(const Table& a, size_t i, std::span<const size_t> a_keys, const Table& b, size_t j,
                                std::span<const size_t> b_keys) {
  for (size_t k = 0; k < a_keys.size(); ++k) {
    auto c = compare_cells(a.columns()[a_keys[k]], i, b.columns()[b_keys[k]], j);
    if (c != 0) return c;
  }
  return std::weak_ordering::equivalent;
}

}  // namespace tessera
