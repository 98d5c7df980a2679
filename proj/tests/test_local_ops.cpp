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

#include "doctest.h"
#include "support/oracle.hpp"
#include "tessera/local_ops.hpp"
#include "tessera/row_key.hpp"

using namespace tessera;
using oracle::Row;

namespace {

const JoinType kTypes[] = {JoinType::Inner, JoinType::Left, JoinType::Right, JoinType::FullOuter};
const JoinAlgorithm kAlgos[] = {JoinAlgorithm::Hash, JoinAlgorithm::Sort};

Schema int_str(const std::string& p) { return Schema({{p + "k", DType::Int64}, {p + "s", DType::Utf8}}); }

Value I(int64_t v) { return v; }
Value S(const char* s) { return std::string(s); }

}  // namespace

TEST_CASE("select") {
  oracle::Gen g(21);
  const Schema s({{"a", DType::Int64}, {"b", DType::Float64}, {"c", DType::Utf8}});
  const Table t = g.table(s, 1000, 10, 0.1);
  CHECK(oracle::identical(select(t, Predicate::constant(true)), t));
  const Table none = select(t, Predicate::constant(false));
  CHECK(none.num_rows() == 0);
  CHECK(none.schema() == s);

  const Predicate p = Predicate::compare(1, CompareOp::Gt, 0.5);
  std::vector<Row> expect;
  for (const auto& r : oracle::rows_of(t)) {
    // NaN sorts above every number, so it passes "> 0.5".
    if (const double* d = std::get_if<double>(&r[1]); d && (std::isnan(*d) || *d > 0.5)) expect.push_back(r);
  }
  CHECK(oracle::identical(select(t, p), oracle::build(s, expect)));

  const Predicate q = parse_predicate("c0 >= 2 and not (c2 == \"a\" or c1 < 0)");
  expect.clear();
  for (const auto& r : oracle::rows_of(t)) {
    const auto* a = std::get_if<int64_t>(&r[0]);
    const auto* b = std::get_if<double>(&r[1]);
    const auto* c = std::get_if<std::string>(&r[2]);
    const bool inner = (c && *c == "a") || (b && !std::isnan(*b) && *b < 0);
    if (a && *a >= 2 && !inner) expect.push_back(r);
  }
  CHECK(oracle::identical(select(t, q), oracle::build(s, expect)));

  const Predicate cb = Predicate::callable([](const RowView& v) { return v.index() % 3 == 0; });
  CHECK(select(t, cb).num_rows() == (t.num_rows() + 2) / 3);
  CHECK_THROWS_AS(select(t, Predicate::compare(7, CompareOp::Eq, int64_t{1})), IndexOutOfRange);
}

TEST_CASE("predicate parsing and printing") {
  const Predicate p = parse_predicate("(c0 == 1 || c1 != \"x\\\"y\") && !(c2 == true)");
  CHECK(p.max_column() == 2);
  CHECK_THROWS_AS(parse_predicate("c0 =="), InvalidArgument);
  CHECK_THROWS_AS(parse_predicate("c0 ~ 1"), InvalidArgument);
  const Predicate q = parse_predicate("c1 > 0.5 and not c0 == 3");
  CHECK(parse_predicate(q.to_string()).to_string() == q.to_string());
  CHECK(q.max_column() == 1);
}

TEST_CASE("project") {
  oracle::Gen g(22);
  const Schema s = g.schema(4);
  const Table t = g.table(s, 100, 10, 0.2);
  const std::vector<size_t> all{0, 1, 2, 3};
  CHECK(oracle::identical(project(t, all), t));
  const std::vector<size_t> rev{2, 0};
  const Table p = project(t, rev);
  REQUIRE(p.num_columns() == 2);
  for (size_t r = 0; r < t.num_rows(); ++r) {
    CHECK(oracle::row_eq(p.row(r), Row{t.value_at(r, 2), t.value_at(r, 0)}));
  }
  for (int it = 0; it < 20; ++it) {
    std::vector<size_t> cols;
    for (size_t k = 0, n = 1 + g.below(6); k < n; ++k) cols.push_back(g.below(4));
    std::vector<Row> expect;
    for (const auto& r : oracle::rows_of(t)) {
      Row out;
      for (size_t c : cols) out.push_back(r[c]);
      expect.push_back(out);
    }
    const Table got = project(t, cols);
    CHECK(oracle::rows_of(got).size() == expect.size());
    for (size_t r = 0; r < expect.size(); ++r) CHECK(oracle::row_eq(got.row(r), expect[r]));
  }
  CHECK_THROWS_AS(project(t, std::vector<size_t>{4}), IndexOutOfRange);
}

TEST_CASE("select and project commute when the predicate only reads kept columns") {
  oracle::Gen g(23);
  const Table t = g.table(Schema({{"a", DType::Int64}, {"b", DType::Float64}, {"c", DType::Bool}}), 300, 8, 0.1);
  const std::vector<size_t> cols{1, 0};
  const Table lhs = project(select(t, parse_predicate("c0 > 1")), cols);
  const Table rhs = select(project(t, cols), parse_predicate("c1 > 1"));
  CHECK(oracle::identical(lhs, rhs));
}

TEST_CASE("sort_by_keys") {
  const Schema s = int_str("");
  const Table t = Table::from_rows(s, {{I(3), S("c")}, {I(1), S("a")}, {I(2), S("b")}});
  const std::vector<size_t> k{0};
  const Table sorted = sort_by_keys(t, k);
  CHECK(oracle::identical(sorted, Table::from_rows(s, {{I(1), S("a")}, {I(2), S("b")}, {I(3), S("c")}})));
  CHECK(oracle::identical(sort_by_keys(sorted, k), sorted));

  oracle::Gen g(24);
  for (int it = 0; it < 30; ++it) {
    const Schema rs = g.schema(3);
    const Table r = g.table(rs, 200, 6, 0.2);
    const std::vector<size_t> keys{g.below(3), g.below(3)};
    const Table out = sort_by_keys(r, keys);
    CHECK(oracle::same_multiset(out, oracle::rows_of(r)));
    for (size_t i = 1; i < out.num_rows(); ++i) {
      const Row a = out.row(i - 1), b = out.row(i);
      int c = oracle::cell_cmp(a[keys[0]], b[keys[0]]);
      if (c == 0) c = oracle::cell_cmp(a[keys[1]], b[keys[1]]);
      CHECK(c <= 0);
    }
  }
}

TEST_CASE("sort is stable") {
  const Schema s = int_str("");
  const Table t = Table::from_rows(s, {{I(2), S("x")}, {I(1), S("p")}, {I(2), S("y")}, {I(1), S("q")}});
  const Table out = sort_by_keys(t, std::vector<size_t>{0});
  CHECK(oracle::identical(out, Table::from_rows(s, {{I(1), S("p")}, {I(1), S("q")}, {I(2), S("x")}, {I(2), S("y")}})));
}

TEST_CASE("merge_sorted") {
  oracle::Gen g(25);
  const Schema s({{"k", DType::Int64}, {"v", DType::Float64}});
  const std::vector<size_t> k{0};
  const Table a = sort_by_keys(g.table(s, 40, 10, 0.1), k);
  CHECK(oracle::identical(merge_sorted(std::vector<Table>{a}, k), a));
  const Table b = sort_by_keys(g.table(s, 30, 10, 0.1), k);
  CHECK(oracle::identical(merge_sorted(std::vector<Table>{a, b}, k), sort_by_keys(concat({a, b}), k)));

  std::vector<Table> shards;
  for (int i = 0; i < 5; ++i) shards.push_back(sort_by_keys(g.table(s, g.below(50), 10, 0.1), k));
  const Table merged = merge_sorted(shards, k);
  std::vector<Row> all;
  for (const auto& sh : shards) {
    for (auto& r : oracle::rows_of(sh)) all.push_back(r);
  }
  std::stable_sort(all.begin(), all.end(), [](const Row& x, const Row& y) { return oracle::cell_cmp(x[0], y[0]) < 0; });
  CHECK(oracle::identical(merged, oracle::build(s, all)));

  const Table unsorted = Table::from_rows(s, {{I(2), 0.0}, {I(1), 0.0}});
  CHECK_THROWS_AS(merge_sorted(std::vector<Table>{unsorted}, k), InvalidArgument);
}

TEST_CASE("join fixtures") {
  const Table l = Table::from_rows(int_str("l"), {{I(1), S("a")}, {I(2), S("b")}});
  const Table r = Table::from_rows(int_str("r"), {{I(2), S("x")}, {I(3), S("y")}});
  for (auto algo : kAlgos) {
    const Table inner = join(l, r, JoinConfig::inner_join(0, 0, algo));
    CHECK(inner.num_columns() == 4);
    CHECK(oracle::same_multiset(inner, {{I(2), S("b"), I(2), S("x")}}));
    const Table full = join(l, r, JoinConfig::full_outer_join(0, 0, algo));
    CHECK(oracle::same_multiset(full, {{I(1), S("a"), Value{}, Value{}},
                                       {I(2), S("b"), I(2), S("x")},
                                       {Value{}, Value{}, I(3), S("y")}}));
    CHECK(join_output_schema(l.schema(), r.schema()).field(2).name == "rk");
  }
}

TEST_CASE("duplicate runs produce the cross product") {
  const Schema s({{"k", DType::Int64}});
  const Table l = Table::from_rows(s, {{I(1)}, {I(1)}});
  const Table r = Table::from_rows(s, {{I(1)}, {I(1)}, {I(1)}});
  for (auto algo : kAlgos) CHECK(join(l, r, JoinConfig::inner_join(0, 0, algo)).num_rows() == 6);
  const Table d = Table::from_rows(s, {{I(7)}, {I(8)}});
  for (auto algo : kAlgos) {
    const Table e = join(l, d, JoinConfig::inner_join(0, 0, algo));
    CHECK(e.num_rows() == 0);
    CHECK(e.num_columns() == 2);
  }
}

TEST_CASE("null keys never match") {
  const Schema s({{"k", DType::Int64}});
  const Table l = Table::from_rows(s, {{Value{}}, {I(1)}});
  const Table r = Table::from_rows(s, {{Value{}}, {I(1)}});
  for (auto algo : kAlgos) {
    CHECK(join(l, r, JoinConfig::inner_join(0, 0, algo)).num_rows() == 1);
    CHECK(join(l, r, JoinConfig::full_outer_join(0, 0, algo)).num_rows() == 3);
  }
}

TEST_CASE("join validation") {
  const Table l = Table::from_rows(int_str("l"), {{I(1), S("a")}});
  CHECK_THROWS_AS(join(l, l, JoinConfig::inner_join(0, 1)), SchemaMismatch);
  CHECK_THROWS_AS(join(l, l, JoinConfig::inner_join(0, 5)), IndexOutOfRange);
  JoinConfig c = JoinConfig::inner_join(0, 0);
  c.right_keys.push_back(1);
  CHECK_THROWS_AS(join(l, l, c), InvalidArgument);
  c.left_keys.clear();
  c.right_keys.clear();
  CHECK_THROWS_AS(join(l, l, c), InvalidArgument);
}

TEST_CASE("random joins match the nested-loop oracle") {
  oracle::Gen g(26);
  for (int it = 0; it < 120; ++it) {
    const auto c = oracle::join_case(g, 120, 16, 0.1);
    for (auto type : kTypes) {
      const auto expect = oracle::nested_loop_join(c.left, c.right, type, c.left_keys, c.right_keys);
      for (auto algo : kAlgos) {
        const JoinConfig cfg{type, algo, c.left_keys, c.right_keys};
        const Table got = join(c.left, c.right, cfg);
        if (!oracle::same_multiset(got, expect)) {
          FAIL("case " << it << " " << join_type_name(type) << "/" << join_algorithm_name(algo) << ": got "
                       << got.num_rows() << " rows, expected " << expect.size());
        }
      }
    }
  }
}

TEST_CASE("set operator identities") {
  oracle::Gen g(27);
  const Schema s = g.schema(2);
  const Table t = g.table(s, 60, 4, 0.2);
  const Table e = Table::empty(s);
  const auto dt = oracle::distinct(oracle::rows_of(t));
  CHECK(oracle::same_multiset(distinct(t), dt));
  CHECK(oracle::same_multiset(union_distinct(t, t), dt));
  CHECK(oracle::same_multiset(union_distinct(t, e), dt));
  CHECK(oracle::same_multiset(intersect_distinct(t, t), dt));
  CHECK(intersect_distinct(t, e).num_rows() == 0);
  CHECK(difference_distinct(t, t).num_rows() == 0);
  CHECK(oracle::same_multiset(difference_distinct(t, e), dt));
  CHECK(oracle::same_multiset(difference_distinct(e, t), dt));

  const Schema i({{"k", DType::Int64}});
  CHECK(intersect_distinct(Table::from_rows(i, {{I(1)}}), Table::from_rows(i, {{I(2)}})).num_rows() == 0);
  CHECK_THROWS_AS(union_distinct(t, Table::empty(Schema({{"x", DType::Bool}}))), SchemaMismatch);
}

TEST_CASE("random set operators match oracles") {
  oracle::Gen g(28);
  for (int it = 0; it < 150; ++it) {
    const auto [a, b] = oracle::set_case(g, 120);
    const Table u = union_distinct(a, b), x = intersect_distinct(a, b), d = difference_distinct(a, b);
    CHECK(oracle::same_multiset(u, oracle::set_union(a, b)));
    CHECK(oracle::same_multiset(x, oracle::set_intersect(a, b)));
    CHECK(oracle::same_multiset(d, oracle::set_symmetric_difference(a, b)));
    CHECK_FALSE(oracle::has_duplicates(u));
    CHECK_FALSE(oracle::has_duplicates(x));
    CHECK_FALSE(oracle::has_duplicates(d));
  }
}

TEST_CASE("hash_partition") {
  oracle::Gen g(29);
  const Schema s = g.schema(3);
  const Table t = g.table(s, 500, 20, 0.1);
  const std::vector<size_t> k{0, 2};
  const auto one = hash_partition(t, k, 1);
  REQUIRE(one.size() == 1);
  CHECK(oracle::identical(one[0], t));

  const Table same = Table::from_rows(s, std::vector<Row>(10, t.row(0)));
  const auto parts_same = hash_partition(same, k, 5);
  size_t non_empty = 0;
  for (const auto& p : parts_same) non_empty += p.num_rows() > 0;
  CHECK(non_empty == 1);

  const auto parts = hash_partition(t, k, 7);
  REQUIRE(parts.size() == 7);
  std::vector<std::vector<Row>> expect(7);
  for (size_t r = 0; r < t.num_rows(); ++r) {
    // Recompute the destination from the documented byte layout.
    std::string bytes;
    for (size_t c : k) {
      const Value v = t.value_at(r, c);
      if (is_null(v)) {
        bytes += '\0';
        continue;
      }
      bytes += '\1';
      bytes += static_cast<char>(s.field(c).dtype);
      auto put = [&](uint64_t x, int n) {
        for (int i = 0; i < n; ++i) bytes += static_cast<char>((x >> (8 * i)) & 0xFF);
      };
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, int64_t>) {
              put(static_cast<uint64_t>(x), 8);
            } else if constexpr (std::is_same_v<T, double>) {
              uint64_t bits;
              double y = x == 0 ? 0.0 : x;
              std::memcpy(&bits, &y, 8);
              if (std::isnan(x)) bits = 0x7FF8000000000000ULL;
              put(bits, 8);
            } else if constexpr (std::is_same_v<T, bool>) {
              put(x ? 1 : 0, 1);
            } else if constexpr (std::is_same_v<T, std::string>) {
              put(x.size(), 4);
              bytes += x;
            }
          },
          v);
    }
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : bytes) {
      h ^= ch;
      h *= 0x100000001B3ULL;
    }
    expect[h % 7].push_back(t.row(r));
  }
  for (size_t p = 0; p < 7; ++p) CHECK(oracle::identical(parts[p], oracle::build(s, expect[p])));
  const auto targets = partition_targets(t, k, 7);
  for (size_t r = 0; r < t.num_rows(); ++r) CHECK(targets[r] < 7);
  CHECK_THROWS_AS(hash_partition(t, k, 0), InvalidArgument);
}
