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
#include <optional>
#include <string>
#include <vector>

#include "tessera/error.hpp"
#include "tessera/table.hpp"

namespace tessera::io {

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed CSV content; the message carries line (and column) numbers.
class CsvError : public Error {
 public:
  using Error::Error;
};

struct CsvReadOptions {
  char delimiter = ',';
  bool has_header = true;
  bool use_threads = true;
  /// Explicit column dtypes; inferred when absent.
  std::optional<std::vector<DType>> schema;
  size_t infer_rows = 1000;
  /// Unquoted fields equal to this text are null. An empty field is always null.
  std::string null_token;

  CsvReadOptions& with_delimiter(char d) {
    delimiter = d;
    return *this;
  }
  CsvReadOptions& with_header(bool h) {
    has_header = h;
    return *this;
  }
  CsvReadOptions& with_threads(bool t) {
    use_threads = t;
    return *this;
  }
  CsvReadOptions& with_schema(std::vector<DType> s) {
    schema = std::move(s);
    return *this;
  }
};

struct CsvWriteOptions {
  char delimiter = ',';
  bool write_header = true;
};

/// RFC 4180 CSV (quoted fields, doubled quotes, LF or CRLF). Without an
/// explicit schema each column is inferred over the first infer_rows data
/// rows: Int64, else Float64, else Bool (true/false, any case), else Utf8.
/// Columns with no non-null sample are Utf8. A quoted empty field ("") is an
/// empty string in Utf8 columns and null elsewhere.
Table read_csv(const std::string& path, const CsvReadOptions& opts = {});
/// Same rules applied to in-memory text. `origin` names the source in errors.
Table parse_csv(std::string_view text, const CsvReadOptions& opts = {}, const std::string& origin = "<memory>");

/// One table per path, in order. Files are parsed concurrently when
/// opts.use_threads is set; the result is identical either way.
std::vector<Table> read_csv_many(const std::vector<std::string>& paths, const CsvReadOptions& opts = {});

/// Float64 uses the shortest representation that parses back to the same
/// bits. Empty strings are written as "" to keep them apart from nulls.
void write_csv(const Table& table, const std::string& path, const CsvWriteOptions& opts = {});
std::string format_csv(const Table& table, const CsvWriteOptions& opts = {});

/// splitmix64; the generator behind generate_table.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}
  uint64_t next() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, bound) by 128-bit multiply-shift.
  uint64_t below(uint64_t bound) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
  }
  /// Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

struct GenerateSpec {
  size_t num_rows = 0;
  Schema schema = experiment_schema();
  uint64_t seed = 0;
  /// Int64 values are drawn from [0, key_cardinality); defaults to num_rows.
  std::optional<uint64_t> key_cardinality;

  /// One Int64 index column and three Float64 columns.
  static Schema experiment_schema();
};

/// Deterministic pseudo-random table. Columns are filled one after another
/// from a single splitmix64 stream seeded with spec.seed: Int64 uniform over
/// [0, key_cardinality), Float64 uniform over [0, 1), Bool fair coin, Utf8 a
/// lowercase string of 0..8 letters. No nulls.
Table generate_table(const GenerateSpec& spec);

/// Contiguous row block `part` of `parts` (earlier blocks get the remainder).
Table row_block(const Table& table, size_t part, size_t parts);
/// Row count of block `part` when `rows` are split into `parts`.
size_t block_rows(size_t rows, size_t part, size_t parts);

}  // namespace tessera::io
