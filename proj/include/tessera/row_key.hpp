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

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tessera/table.hpp"

namespace tessera {

/// Canonical byte encoding of one row restricted to a column subset.
///
/// Per column: a presence byte (0x00 null, 0x01 present); when present, the
/// dtype tag byte followed by the value. Int64 is 8 little-endian bytes.
/// Float64 is the 8 little-endian bytes of the normalized bit pattern (-0.0
/// becomes +0.0, every NaN becomes 0x7FF8000000000000). Bool is one byte.
/// Utf8 is a 4-byte little-endian length followed by the bytes.
///
/// Two rows are engine-equal iff their keys are byte-equal, so null == null,
/// NaN == NaN and -0.0 == +0.0.
struct RowKey {
  std::string bytes;

  bool operator==(const RowKey&) const = default;
  auto operator<=>(const RowKey&) const = default;
};

inline constexpr uint64_t kNormalizedNaNBits = 0x7FF8000000000000ULL;
inline constexpr uint64_t kFnvOffsetBasis = 0xCBF29CE484222325ULL;
inline constexpr uint64_t kFnvPrime = 0x100000001B3ULL;

/// Bit pattern used for hashing and equality of a Float64 value.
uint64_t normalized_float_bits(double v);

RowKey encode_row(const Table& table, size_t row_index, std::span<const size_t> column_subset);
/// Appends the encoding to `out` without clearing it.
void append_row_encoding(const Table& table, size_t row_index, std::span<const size_t> column_subset,
                         std::string& out);

/// 64-bit FNV-1a.
constexpr uint64_t fnv1a(std::string_view bytes) {
  uint64_t h = kFnvOffsetBasis;
  for (char c : bytes) {
    h ^= static_cast<uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

inline uint64_t hash_row(const RowKey& key) { return fnv1a(key.bytes); }

/// All columns of `table`, in order; the full-row subset.
std::vector<size_t> all_columns(const Table& table);

/// Throws IndexOutOfRange if any index is not a column of `table`.
void check_columns(const Table& table, std::span<const size_t> columns, std::string_view what);

/// Encodes the given columns of every row into one arena. Used by the hash
/// based operators to avoid one allocation per row.
class EncodedRows {
 public:
  EncodedRows(const Table& table, std::span<const size_t> columns);

  size_t size() const { return hashes_.size(); }
  std::string_view key(size_t row) const {
    return std::string_view(bytes_).substr(offsets_[row], offsets_[row + 1] - offsets_[row]);
  }
  uint64_t hash(size_t row) const { return hashes_[row]; }
  /// True if any encoded column of `row` is null.
  bool has_null(size_t row) const { return has_null_[row] != 0; }

 private:
  std::string bytes_;
  std::vector<size_t> offsets_;
  std::vector<uint64_t> hashes_;
  std::vector<uint8_t> has_null_;
};

/// Canonical ordering of a single cell: null first, numeric order for
/// Int64/Float64 (NaN greatest, -0.0 == +0.0), false < true, byte-lexicographic
/// Utf8. Both columns must share a dtype.
std::weak_ordering compare_cells(const Column& a, size_t i, const Column& b, size_t j);

/// Lexicographic comparison of two rows over paired key columns.
std::weak_ordering compare_keys(const Table& a, size_t i, std::span<const size_t> a_keys, const Table& b, size_t j,
                                std::span<const size_t> b_keys);

}  // namespace tessera
