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
#include <bit>
#include <cctype>

#include "tessera/local_ops.hpp"
#include "tessera/row_key.hpp"

namespace tessera {

std::string_view join_type_name(JoinType t) {
  switch (t) {
    case JoinType::Inner:
      return "inner";
    case JoinType::Left:
      return "left";
    case JoinType::Right:
      return "right";
    case JoinType::FullOuter:
      return "full_outer";
  }
  return "?";
}

std::string_view join_algorithm_name(JoinAlgorithm a) { return a == JoinAlgorithm::Hash ? "hash" : "sort"; }

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

JoinType parse_join_type(std::string_view s) {
  const auto l = lowercase(s);
  if (l == "inner") return JoinType::Inner;
  if (l == "left") return JoinType::Left;
  if (l == "right") return JoinType::Right;
  if (l == "full_outer" || l == "full-outer" || l == "fullouter" || l == "outer" || l == "full") {
    return JoinType::FullOuter;
  }
  throw InvalidArgument("unknown join type '" + std::string(s) + "'");
}

JoinAlgorithm parse_join_algorithm(std::string_view s) {
  const auto l = lowercase(s);
  if (l == "hash") return JoinAlgorithm::Hash;
  if (l == "sort") return JoinAlgorithm::Sort;
  throw InvalidArgument("unknown join algorithm '" + std::string(s) + "'");
}

void validate_join(const Table& left, const Table& right, const JoinConfig& cfg) {
  if (cfg.left_keys.empty()) throw InvalidArgument("join: no key columns");
  if (cfg.left_keys.size() != cfg.right_keys.size()) {
    throw InvalidArgument("join: " + std::to_string(cfg.left_keys.size()) + " left keys vs " +
                          std::to_string(cfg.right_keys.size()) + " right keys");
  }
  check_columns(left, cfg.left_keys, "join (left keys)");
  check_columns(right, cfg.right_keys, "join (right keys)");
  for (size_t k = 0; k < cfg.left_keys.size(); ++k) {
    const DType l = left.schema().field(cfg.left_keys[k]).dtype;
    const DType r = right.schema().field(cfg.right_keys[k]).dtype;
    if (l != r) {
      throw SchemaMismatch("join key " + std::to_string(k) + ": left column " + std::to_string(cfg.left_keys[k]) +
                           " is " + std::string(dtype_name(l)) + ", right column " +
                           std::to_string(cfg.right_keys[k]) + " is " + std::string(dtype_name(r)));
    }
  }
}

Schema join_output_schema(const Schema& left, const Schema& right) {
  auto fields = left.fields();
  fields.insert(fields.end(), right.fields().begin(), right.fields().end());
  return Schema(std::move(fields));
}

namespace {

bool keeps_unmatched_left(JoinType t) { return t == JoinType::Left || t == JoinType::FullOuter; }
bool keeps_unmatched_right(JoinType t) { return t == JoinType::Right || t == JoinType::FullOuter; }

Table assemble(const Table& left, const Table& right, const std::vector<int64_t>& li,
               const std::vector<int64_t>& ri) {
  return hstack(take_rows_or_null(left, li), take_rows_or_null(right, ri));
}

}  // namespace

Table hash_join(const Table& left, const Table& right, const JoinConfig& cfg) {
  validate_join(left, right, cfg);

  const bool build_is_right = right.num_rows() <= left.num_rows();
  const Table& build = build_is_right ? right : left;
  const Table& probe = build_is_right ? left : right;
  const auto& build_keys = build_is_right ? cfg.right_keys : cfg.left_keys;
  const auto& probe_keys = build_is_right ? cfg.left_keys : cfg.right_keys;
  const bool keep_probe = build_is_right ? keeps_unmatched_left(cfg.join_type) : keeps_unmatched_right(cfg.join_type);
  const bool keep_build = build_is_right ? keeps_unmatched_right(cfg.join_type) : keeps_unmatched_left(cfg.join_type);

  const EncodedRows bk(build, build_keys);
  const EncodedRows pk(probe, probe_keys);

  // Chained hash table over build rows: head per bucket, next per row.
  const size_t nbuckets = std::bit_ceil(std::max<size_t>(16, build.num_rows() * 2));
  const uint64_t mask = nbuckets - 1;
  std::vector<int64_t> head(nbuckets, -1);
  std::vector<int64_t> next(build.num_rows(), -1);
  for (size_t r = build.num_rows(); r-- > 0;) {
    if (bk.has_null(r)) continue;
    const uint64_t b = bk.hash(r) & mask;
    next[r] = head[b];
    head[b] = static_cast<int64_t>(r);
  }

  std::vector<int64_t> probe_out;
  std::vector<int64_t> build_out;
  probe_out.reserve(probe.num_rows());
  build_out.reserve(probe.num_rows());
  std::vector<uint8_t> build_matched(keep_build ? build.num_rows() : 0, 0);

  for (size_t p = 0; p < probe.num_rows(); ++p) {
    bool matched = false;
    if (!pk.has_null(p)) {
      const uint64_t h = pk.hash(p);
      const auto key = pk.key(p);
      for (int64_t b = head[h & mask]; b != -1; b = next[b]) {
        if (bk.hash(b) != h || bk.key(b) != key) continue;
        probe_out.push_back(static_cast<int64_t>(p));
        build_out.push_back(b);
        matched = true;
        if (keep_build) build_matched[b] = 1;
      }
    }
    if (!matched && keep_probe) {
      probe_out.push_back(static_cast<int64_t>(p));
      build_out.push_back(kNullRow);
    }
  }
  if (keep_build) {
    for (size_t b = 0; b < build.num_rows(); ++b) {
      if (!build_matched[b]) {
        probe_out.push_back(kNullRow);
        build_out.push_back(static_cast<int64_t>(b));
      }
    }
  }
  return build_is_right ? assemble(left, right, probe_out, build_out) : assemble(left, right, build_out, probe_out);
}

namespace {

// Rows with a null key component cannot match, so they are split off before sorting.
void split_null_keys(const Table& t, std::span<const size_t> keys, std::vector<uint64_t>& with_key,
                     std::vector<uint64_t>& null_key) {
  for (size_t r = 0; r < t.num_rows(); ++r) {
    bool any_null = false;
    for (size_t k : keys) {
      if (!t.columns()[k].is_valid(r)) {
        any_null = true;
        break;
      }
    }
    (any_null ? null_key : with_key).push_back(r);
  }
}

}  // namespace

Table sort_join(const Table& left, const Table& right, const JoinConfig& cfg) {
  validate_join(left, right, cfg);
  const auto& lk = cfg.left_keys;
  const auto& rk = cfg.right_keys;

  std::vector<uint64_t> lrows, lnull, rrows, rnull;
  split_null_keys(left, lk, lrows, lnull);
  split_null_keys(right, rk, rrows, rnull);
  auto by_key = [](const Table& t, std::span<const size_t> keys) {
    return [&t, keys](uint64_t a, uint64_t b) { return compare_keys(t, a, keys, t, b, keys) < 0; };
  };
  std::stable_sort(lrows.begin(), lrows.end(), by_key(left, lk));
  std::stable_sort(rrows.begin(), rrows.end(), by_key(right, rk));

  const bool keep_l = keeps_unmatched_left(cfg.join_type);
  const bool keep_r = keeps_unmatched_right(cfg.join_type);
  std::vector<int64_t> lo, ro;

  size_t i = 0, j = 0;
  while (i < lrows.size() && j < rrows.size()) {
    auto c = compare_keys(left, lrows[i], lk, right, rrows[j], rk);
    if (c < 0) {
      if (keep_l) {
        lo.push_back(static_cast<int64_t>(lrows[i]));
        ro.push_back(kNullRow);
      }
      ++i;
    } else if (c > 0) {
      if (keep_r) {
        lo.push_back(kNullRow);
        ro.push_back(static_cast<int64_t>(rrows[j]));
      }
      ++j;
    } else {
      size_t iend = i + 1;
      while (iend < lrows.size() && compare_keys(left, lrows[i], lk, left, lrows[iend], lk) == 0) ++iend;
      size_t jend = j + 1;
      while (jend < rrows.size() && compare_keys(right, rrows[j], rk, right, rrows[jend], rk) == 0) ++jend;
      for (size_t a = i; a < iend; ++a) {
        for (size_t b = j; b < jend; ++b) {
          lo.push_back(static_cast<int64_t>(lrows[a]));
          ro.push_back(static_cast<int64_t>(rrows[b]));
        }
      }
      i = iend;
      j = jend;
    }
  }
  if (keep_l) {
    for (; i < lrows.size(); ++i) {
      lo.push_back(static_cast<int64_t>(lrows[i]));
      ro.push_back(kNullRow);
    }
    for (uint64_t r : lnull) {
      lo.push_back(static_cast<int64_t>(r));
      ro.push_back(kNullRow);
    }
  }
  if (keep_r) {
    for (; j < rrows.size(); ++j) {
      lo.push_back(kNullRow);
      ro.push_back(static_cast<int64_t>(rrows[j]));
    }
    for (uint64_t r : rnull) {
      lo.push_back(kNullRow);
      ro.push_back(static_cast<int64_t>(r));
    }
  }
  return assemble(left, right, lo, ro);
}

Table join(const Table& left, const Table& right, const JoinConfig& cfg) {
  return cfg.algorithm == JoinAlgorithm::Hash ? hash_join(left, right, cfg) : sort_join(left, right, cfg);
}

}  // namespace tessera
