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

#include <numeric>

#include "tessera/local_ops.hpp"
#include "tessera/row_key.hpp"

namespace tessera {

Table select(const Table& table, const Predicate& pred) {
  pred.validate(table.schema());
  std::vector<uint64_t> keep;
  for (size_t r = 0; r < table.num_rows(); ++r) {
    if (pred.evaluate(table, r)) keep.push_back(r);
  }
  if (keep.size() == table.num_rows()) return table;
  return take_rows(table, keep);
}

Table project(const Table& table, std::span<const size_t> columns) {
  if (columns.empty()) throw InvalidArgument("project: empty column selection");
  check_columns(table, columns, "project");
  std::vector<Field> fields;
  std::vector<Column> cols;
  fields.reserve(columns.size());
  cols.reserve(columns.size());
  for (size_t c : columns) {
    fields.push_back(table.schema().field(c));
    cols.push_back(table.column(c));
  }
  return Table(Schema(std::move(fields)), std::move(cols));
}

}  // namespace tessera
