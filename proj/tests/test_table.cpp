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

#include <cmath>
#include <map>

#include "doctest.h"
#include "support/oracle.hpp"
#include "tessera/row_key.hpp"

using namespace tessera;

namespace {

Schema int_str() { return Schema({{"k", DType::Int64}, {"s", DType::Utf8}}); }

std::string hex(const std::string& bytes) {
  static const char* d = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out += d[c >> 4];
    out += d[c & 15];
  }
  return out;
}

}  // namespace

TEST_CASE("bitmap keeps LSB-first bits and clears padding") {
  Bitmap b(10, false);
  b.set(0, true);
  b.set(9, true);
  CHECK(b.bytes()[0] == 0x01);
  CHECK(b.bytes()[1] == 0x02);
  CHECK(b.count_set() == 2);
  Bitmap c(std::vector<uint8_t>{0xFF, 0xFF}, 9);
  CHECK(c.bytes()[1] == 0x01);
  CHECK(c.count_set() == 9);
  c.push_back(false);
  CHECK(c.length() == 10);
  CHECK_FALSE(c.get(9));
}

TEST_CASE("table construction validates columns") {
  ColumnBuilder a(DType::Int64), b(DType::Utf8);
  a.append_int64(1);
  b.append_utf8("x");
  b.append_null();
  CHECK_THROWS_AS(Table(int_str(), {a.finish(), b.finish()}), SchemaMismatch);
  CHECK_THROWS_AS(Table(Schema(std::vector<Field>{}), {}), Error);
  ColumnBuilder c(DType::Float64);
  c.append_float64(1);
  CHECK_THROWS_AS(Table(Schema({{"x", DType::Int64}}), {c.finish()}), SchemaMismatch);

  const Table t = Table::from_rows(int_str(), {{int64_t{1}, std::string("a")}, {Value{}, std::string("")}});
  CHECK(t.num_rows() == 2);
  CHECK(t.column(0).null_count() == 1);
  CHECK(t.column(1).utf8_at(1).empty());
  CHECK(t.column(1).is_valid(1));
  CHECK_THROWS_AS(t.column(2), IndexOutOfRange);
}

TEST_CASE("zero encodes as presence, tag and eight zero bytes") {
  const Table t = Table::from_rows(Schema({{"x", DType::Int64}}), {{int64_t{0}}});
  const std::vector<size_t> cols{0};
  CHECK(hex(encode_row(t, 0, cols).bytes) == "01000000000000000000");
}

TEST_CASE("encoding layout per dtype") {
  const Schema s({{"i", DType::Int64}, {"f", DType::Float64}, {"u", DType::Utf8}, {"b", DType::Bool}});
  const Table t = Table::from_rows(s, {{int64_t{258}, 1.0, std::string("hi"), true}, {Value{}, Value{}, Value{}, Value{}}});
  const auto cols = all_columns(t);
  CHECK(hex(encode_row(t, 0, cols).bytes) ==
        "01" "00" "0201000000000000"
        "01" "01" "000000000000f03f"
        "01" "02" "02000000" "6869"
        "01" "03" "01");
  CHECK(hex(encode_row(t, 1, cols).bytes) == "00000000");
  CHECK_THROWS_AS(encode_row(t, 2, cols), IndexOutOfRange);
  const std::vector<size_t> bad{4};
  CHECK_THROWS_AS(encode_row(t, 0, bad), IndexOutOfRange);
}

TEST_CASE("signed zeros and NaN payloads normalize") {
  const Schema s({{"f", DType::Float64}});
  const double quiet = std::nan("1"), other = -std::nan("77");
  const Table t = Table::from_rows(s, {{-0.0}, {0.0}, {quiet}, {other}});
  const std::vector<size_t> cols{0};
  CHECK(encode_row(t, 0, cols) == encode_row(t, 1, cols));
  CHECK(encode_row(t, 2, cols) == encode_row(t, 3, cols));
  CHECK(normalized_float_bits(other) == kNormalizedNaNBits);
  CHECK(normalized_float_bits(-0.0) == 0);
}

TEST_CASE("utf8 length prefix prevents concatenation ambiguity") {
  const Schema s({{"a", DType::Utf8}, {"b", DType::Utf8}});
  const Table t = Table::from_rows(s, {{std::string("ab"), std::string("c")}, {std::string("a"), std::string("bc")}});
  const auto cols = all_columns(t);
  CHECK(encode_row(t, 0, cols) != encode_row(t, 1, cols));
}

TEST_CASE("key equality agrees with value equality on random rows") {
  oracle::Gen g(11);
  const Schema s({{"a", DType::Int64}, {"b", DType::Float64}, {"c", DType::Utf8}, {"d", DType::Bool}});
  const Table t = g.table(s, 1000, 3, 0.2);
  const auto cols = all_columns(t);
  std::vector<RowKey> keys;
  for (size_t r = 0; r < t.num_rows(); ++r) keys.push_back(encode_row(t, r, cols));
  const auto rows = oracle::rows_of(t);
  size_t equal_pairs = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = i + 1; j < rows.size(); ++j) {
      const bool by_value = oracle::row_eq(rows[i], rows[j]);
      equal_pairs += by_value;
      if ((keys[i] == keys[j]) != by_value) FAIL("mismatch at rows " << i << ", " << j);
    }
  }
  CHECK(equal_pairs > 0);
}

TEST_CASE("fnv1a constants") {
  CHECK(fnv1a("") == 0xCBF29CE484222325ULL);
  CHECK(fnv1a("a") == 0xAF63DC4C8601EC8CULL);
  CHECK(fnv1a("foobar") == 0x85944171F73967E8ULL);
  static_assert(fnv1a("") == kFnvOffsetBasis);
}

TEST_CASE("int64 keys spread evenly over 16 buckets") {
  std::mt19937_64 rng(42);
  ColumnBuilder b(DType::Int64);
  for (int i = 0; i < 100000; ++i) b.append_int64(static_cast<int64_t>(rng()));
  const Table t(Schema({{"k", DType::Int64}}), {b.finish()});
  std::vector<size_t> buckets(16, 0);
  const std::vector<size_t> cols{0};
  for (size_t r = 0; r < t.num_rows(); ++r) ++buckets[hash_row(encode_row(t, r, cols)) % 16];
  const double mean = 100000.0 / 16;
  const size_t mx = *std::max_element(buckets.begin(), buckets.end());
  MESSAGE("max bucket " << mx << " vs mean " << mean);
  CHECK(mx <= 1.25 * mean);
}

TEST_CASE("EncodedRows matches encode_row") {
  oracle::Gen g(5);
  const Table t = g.table(g.schema(4), 300, 5, 0.2);
  const std::vector<size_t> cols{2, 0};
  EncodedRows enc(t, cols);
  REQUIRE(enc.size() == t.num_rows());
  for (size_t r = 0; r < t.num_rows(); ++r) {
    const RowKey k = encode_row(t, r, cols);
    CHECK(enc.key(r) == k.bytes);
    CHECK(enc.hash(r) == hash_row(k));
    CHECK(enc.has_null(r) == (!t.column(2).is_valid(r) || !t.column(0).is_valid(r)));
  }
}

TEST_CASE("concat") {
  oracle::Gen g(3);
  const Schema s = g.schema(3);
  const Table a = g.table(s, 17, 5, 0.2), b = g.table(s, 9, 5, 0.2);
  CHECK(oracle::identical(concat({a}), a));
  CHECK(oracle::identical(concat({Table::empty(s), a}), a));
  const Table ab = concat({a, b});
  CHECK(ab.num_rows() == a.num_rows() + b.num_rows());
  auto rows = oracle::rows_of(a);
  for (auto& r : oracle::rows_of(b)) rows.push_back(r);
  CHECK(oracle::identical(ab, oracle::build(s, rows)));
  const Table other = Table::empty(Schema({{"x", DType::Int64}}));
  CHECK_THROWS_AS(concat({a, other}), SchemaMismatch);
}

TEST_CASE("take_rows") {
  oracle::Gen g(4);
  const Schema s = g.schema(4);
  const Table t = g.table(s, 50, 6, 0.2);
  std::vector<uint64_t> ident(t.num_rows());
  for (size_t i = 0; i < ident.size(); ++i) ident[i] = i;
  CHECK(oracle::identical(take_rows(t, ident), t));
  const Table none = take_rows(t, std::vector<uint64_t>{});
  CHECK(none.num_rows() == 0);
  CHECK(none.schema() == s);

  std::vector<uint64_t> idx;
  for (int i = 0; i < 200; ++i) idx.push_back(g.below(t.num_rows()));
  const Table got = take_rows(t, idx);
  REQUIRE(got.num_rows() == idx.size());
  for (size_t i = 0; i < idx.size(); ++i) CHECK(oracle::row_eq(got.row(i), t.row(idx[i])));
  CHECK_THROWS_AS(take_rows(t, std::vector<uint64_t>{50}), IndexOutOfRange);

  const std::vector<int64_t> with_null{1, kNullRow, 0};
  const Table padded = take_rows_or_null(t, with_null);
  CHECK(oracle::row_eq(padded.row(1), oracle::Row(s.num_fields())));
  CHECK(oracle::row_eq(padded.row(2), t.row(0)));
}

TEST_CASE("compare_cells ordering") {
  const Schema s({{"f", DType::Float64}});
  const Table t = Table::from_rows(s, {{Value{}}, {-1.0}, {-0.0}, {0.0}, {2.0}, {std::nan("")}});
  for (size_t i = 0; i < t.num_rows(); ++i) {
    for (size_t j = 0; j < t.num_rows(); ++j) {
      const int expect = oracle::cell_cmp(t.value_at(i, 0), t.value_at(j, 0));
      const auto got = compare_cells(t.column(0), i, t.column(0), j);
      CHECK((got < 0) == (expect < 0));
      CHECK((got == 0) == (expect == 0));
    }
  }
}

TEST_CASE("dtype names") {
  for (DType d : {DType::Int64, DType::Float64, DType::Utf8, DType::Bool}) CHECK(parse_dtype(dtype_name(d)) == d);
  CHECK(parse_dtype("STRING") == DType::Utf8);
  CHECK_THROWS_AS(parse_dtype("decimal"), InvalidArgument);
}
