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

#include "tessera/io.hpp"

namespace tessera::io {

Schema GenerateSpec::experiment_schema() {
  return Schema({{"index", DType::Int64}, {"v0", DType::Float64}, {"v1", DType::Float64}, {"v2", DType::Float64}});
}

Table generate_table(const GenerateSpec& spec) {
  if (spec.schema.num_fields() == 0) throw InvalidArgument("generate_table: schema must have at least one column");
  const uint64_t cardinality = spec.key_cardinality.value_or(spec.num_rows);
  if (cardinality == 0 && spec.num_rows > 0) {
    for (const auto& f : spec.schema.fields()) {
      if (f.dtype == DType::Int64) throw InvalidArgument("generate_table: key_cardinality must be >= 1");
    }
  }
  SplitMix64 rng(spec.seed);
  const size_t n = spec.num_rows;
  std::vector<Column> cols;
  for (const auto& f : spec.schema.fields()) {
    switch (f.dtype) {
      case DType::Int64: {
        std::vector<int64_t> v(n);
        for (auto& x : v) x = static_cast<int64_t>(rng.below(cardinality));
        cols.push_back(Column::from_int64(std::move(v), Bitmap(n)));
        break;
      }
      case DType::Float64: {
        std::vector<double> v(n);
        for (auto& x : v) x = rng.unit();
        cols.push_back(Column::from_float64(std::move(v), Bitmap(n)));
        break;
      }
      case DType::Bool: {
        std::vector<uint8_t> v(n);
        for (auto& x : v) x = static_cast<uint8_t>(rng.next() >> 63);
        cols.push_back(Column::from_bool(std::move(v), Bitmap(n)));
        break;
      }
      case DType::Utf8: {
        ColumnBuilder b(DType::Utf8);
        b.reserve(n);
        std::string s;
        for (size_t i = 0; i < n; ++i) {
          s.resize(rng.below(9));
          for (auto& c : s) c = static_cast<char>('a' + rng.below(26));
          b.append_utf8(s);
        }
        cols.push_back(b.finish());
        break;
      }
    }
  }
  return Table(spec.schema, std::move(cols));
}

size_t block_rows(size_t rows, size_t part, size_t parts) {
  if (parts == 0 || part >= parts) throw InvalidArgument("block " + std::to_string(part) + " of " + std::to_string(parts));
  return rows / parts + (part < rows % parts ? 1 : 0);
}

Table row_block(const Table& table, size_t part, size_t parts) {
  const size_t rows = table.num_rows();
  size_t start = 0;
  for (size_t p = 0; p < part; ++p) start += block_rows(rows, p, parts);
  const size_t len = block_rows(rows, part, parts);
  std::vector<uint64_t> idx(len);
  for (size_t i = 0; i < len; ++i) idx[i] = start + i;
  return take_rows(table, idx);
}

}  // namespace tessera::io
