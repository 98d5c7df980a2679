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

#include "tessera/comm/context.hpp"
#include "tessera/io.hpp"
#include "tessera/local_ops.hpp"

namespace tessera::cli {

/// Bad flags or flag combinations; maps to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

enum class Op { Join, Union, Intersect, Difference, Select, Project };

Op parse_op(std::string_view s);
std::string_view op_name(Op op);
bool is_binary(Op op);

/// Operator selection shared by `run`, `verify` and `bench`.
struct OpConfig {
  Op op = Op::Join;
  JoinConfig join = JoinConfig::inner_join(0, 0);
  std::string predicate = "true";
  std::vector<size_t> columns;

  void validate() const;
  /// Output dtypes for the given input dtypes.
  std::vector<DType> output_dtypes(const Schema& left, const Schema* right) const;
};

struct InputConfig {
  std::vector<std::string> left;
  std::vector<std::string> right;
  /// Explicit input dtypes; inferred per file when empty.
  std::vector<DType> schema;
  char delimiter = ',';

  io::CsvReadOptions read_options() const;
};

struct RunConfig {
  OpConfig op;
  InputConfig inputs;
  size_t world_size = 1;
  comm::TransportKind transport = comm::TransportKind::InProcess;
  size_t rank = 0;
  std::string hosts_file;
  /// Contains "{rank}", replaced by each worker's rank.
  std::string output_template;
  std::string timing_path;
  comm::Millis connect_timeout = comm::kDefaultConnectTimeout;
  comm::Millis recv_timeout = comm::kDefaultRecvTimeout;
};

struct TimingRecord {
  std::string op;
  size_t world_size = 0;
  size_t rank = 0;
  uint64_t rows_in_left = 0;
  uint64_t rows_in_right = 0;
  uint64_t rows_out = 0;
  double op_wall_clock_ms = 0;
  double total_wall_clock_ms = 0;

  std::string to_json_line() const;
  static TimingRecord from_json_line(const std::string& line);
};

std::string expand_rank(const std::string& tmpl, size_t rank);

/// Executes every local worker (transport=local) or this process's rank
/// (transport=tcp). Returns the timing records produced here, in rank order.
std::vector<TimingRecord> cmd_run(const RunConfig& cfg);

struct GenerateConfig {
  uint64_t rows = 0;
  uint64_t seed = 0;
  std::optional<uint64_t> key_cardinality;
  std::string out_prefix;
  size_t parts = 1;
  std::vector<DType> schema;
};

/// Writes <out_prefix>_<i>.csv for every part; returns the paths.
std::vector<std::string> cmd_generate(const GenerateConfig& cfg);

struct VerifyConfig {
  OpConfig op;
  InputConfig inputs;
  std::vector<std::string> outputs;
};

struct VerifyResult {
  bool ok = false;
  uint64_t expected_rows = 0;
  uint64_t actual_rows = 0;
  /// For inner joins: sum over keys of count_left(k) * count_right(k).
  std::optional<uint64_t> key_count_identity;
  std::string message;
};

VerifyResult cmd_verify(const VerifyConfig& cfg);

enum class BenchMode { Weak, Strong };

struct BenchConfig {
  BenchMode mode = BenchMode::Strong;
  OpConfig op;
  uint64_t rows_per_worker = 100'000;
  uint64_t total_rows = 2'000'000;
  std::vector<size_t> workers{1, 2, 4};
  size_t repetitions = 3;
  uint64_t seed = 1;
  std::string report_path;
};

struct BenchRow {
  size_t world_size = 0;
  /// Median over repetitions of the slowest worker's operator time.
  double median_ms = 0;
  double speedup = 0;
  uint64_t rows_out = 0;
  /// Median per-rank operator time.
  std::vector<double> per_worker_median_ms;
};

std::vector<BenchRow> cmd_bench(const BenchConfig& cfg);
void write_bench_report(const std::vector<BenchRow>& rows, const std::string& path);

/// Parses argv and dispatches; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace tessera::cli
