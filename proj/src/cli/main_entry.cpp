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

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace tessera::cli {

namespace {

struct OpFlags {
  std::string op = "join";
  std::string join_type = "inner";
  std::string algorithm = "hash";
  std::vector<size_t> left_keys{0};
  std::vector<size_t> right_keys{0};
  std::string predicate = "true";
  std::vector<size_t> columns;

  void add_to(CLI::App& app) {
    app.add_option("--op", op, "Operator: join, union, intersect, difference, select, project")
        ->check(CLI::IsMember({"join", "union", "intersect", "difference", "select", "project"}))
        ->capture_default_str();
    app.add_option("--join-type", join_type, "inner, left, right or full_outer")->capture_default_str();
    app.add_option("--algorithm", algorithm, "Join algorithm: hash or sort")->capture_default_str();
    app.add_option("--left-keys", left_keys, "Left join key column indices (comma separated)")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--right-keys", right_keys, "Right join key column indices (comma separated)")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--predicate", predicate, "Select predicate, e.g. 'c1 > 0.5 and c0 != 3'")
        ->capture_default_str();
    app.add_option("--columns", columns, "Project column indices (comma separated)")->delimiter(',');
  }

  OpConfig build() const {
    OpConfig cfg;
    cfg.op = parse_op(op);
    try {
      cfg.join.join_type = parse_join_type(join_type);
      cfg.join.algorithm = parse_join_algorithm(algorithm);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    cfg.join.left_keys = left_keys;
    cfg.join.right_keys = right_keys;
    cfg.predicate = predicate;
    cfg.columns = columns;
    cfg.validate();
    return cfg;
  }
};

struct InputFlags {
  std::vector<std::string> left;
  std::vector<std::string> right;
  std::vector<std::string> schema;
  char delimiter = ',';

  void add_to(CLI::App& app) {
    app.add_option("--left", left, "Left (or only) input CSV: one per worker, or one file split into blocks")
        ->required();
    app.add_option("--right", right, "Right input CSV(s) for binary operators");
    app.add_option("--schema", schema, "Explicit input dtypes, e.g. int64,float64,float64,float64")
        ->delimiter(',');
    app.add_option("--delimiter", delimiter, "CSV field delimiter")->capture_default_str();
  }

  InputConfig build() const {
    InputConfig in;
    in.left = left;
    in.right = right;
    in.delimiter = delimiter;
    try {
      for (const auto& s : schema) in.schema.push_back(parse_dtype(s));
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    return in;
  }
};

std::vector<DType> parse_dtypes(const std::vector<std::string>& names) {
  std::vector<DType> out;
  try {
    for (const auto& s : names) out.push_back(parse_dtype(s));
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  return out;
}

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"tessera: distributed columnar table operators"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write seeded random CSV part files");
  GenerateConfig gen_cfg;
  std::vector<std::string> gen_schema;
  gen->add_option("--rows", gen_cfg.rows, "Total rows across all parts")->required();
  gen->add_option("--seed", gen_cfg.seed, "Seed of part 0; part i uses seed + i")->capture_default_str();
  gen->add_option("--key-cardinality", gen_cfg.key_cardinality,
                  "Int64 values are drawn from [0, key-cardinality) (default: --rows)");
  gen->add_option("--out-prefix", gen_cfg.out_prefix, "Files are written as <prefix>_<part>.csv")->required();
  gen->add_option("--parts", gen_cfg.parts, "Number of part files")->capture_default_str();
  gen->add_option("--schema", gen_schema, "Column dtypes (default: int64,float64,float64,float64)")
      ->delimiter(',');

  // run
  auto* run = app.add_subcommand("run", "Load inputs, run a distributed operator, write per-rank outputs");
  RunConfig run_cfg;
  OpFlags run_op;
  InputFlags run_in;
  std::string transport = "local";
  int64_t connect_ms = comm::kDefaultConnectTimeout.count();
  int64_t recv_ms = comm::kDefaultRecvTimeout.count();
  run_op.add_to(*run);
  run_in.add_to(*run);
  run->add_option("--world-size", run_cfg.world_size, "Number of workers (tcp: defaults to the hosts file size)")
      ->capture_default_str();
  run->add_option("--transport", transport, "local (threads in this process) or tcp (one process per rank)")
      ->check(CLI::IsMember({"local", "tcp"}))
      ->capture_default_str();
  run->add_option("--rank", run_cfg.rank, "This process's rank (tcp only)");
  run->add_option("--hosts", run_cfg.hosts_file, "host:port per line, line number = rank (tcp only)");
  run->add_option("--output", run_cfg.output_template, "Output CSV path; {rank} is replaced by the rank")
      ->required();
  run->add_option("--timing", run_cfg.timing_path, "JSON-lines timing output ({rank} allowed)");
  run->add_option("--connect-timeout-ms", connect_ms, "TCP connect timeout")->capture_default_str();
  run->add_option("--recv-timeout-ms", recv_ms, "Per-superstep receive timeout")->capture_default_str();

  // verify
  auto* ver = app.add_subcommand("verify", "Recompute an operator serially and compare with a run's outputs");
  OpFlags ver_op;
  InputFlags ver_in;
  std::vector<std::string> ver_outputs;
  std::string ver_template;
  size_t ver_world = 0;
  ver_op.add_to(*ver);
  ver_in.add_to(*ver);
  ver->add_option("--outputs", ver_outputs, "Output CSV files of the run");
  ver->add_option("--output", ver_template, "Output template of the run ({rank}); use with --world-size");
  ver->add_option("--world-size", ver_world, "World size of the run when --output is a template");

  // bench
  auto* bench = app.add_subcommand("bench", "Weak/strong scaling benchmark over in-process workers");
  BenchConfig bench_cfg;
  OpFlags bench_op;
  std::string mode = "strong";
  bench_op.add_to(*bench);
  bench->add_option("--mode", mode, "weak or strong")->check(CLI::IsMember({"weak", "strong"}))->capture_default_str();
  bench->add_option("--rows-per-worker", bench_cfg.rows_per_worker, "Rows per relation per worker (weak)")
      ->capture_default_str();
  bench->add_option("--total-rows", bench_cfg.total_rows, "Rows per relation (strong)")->capture_default_str();
  bench->add_option("--workers", bench_cfg.workers, "World sizes, e.g. 1,2,4,8")->delimiter(',')->capture_default_str();
  bench->add_option("--reps", bench_cfg.repetitions, "Repetitions per world size")->capture_default_str();
  bench->add_option("--seed", bench_cfg.seed, "Generator seed")->capture_default_str();
  bench->add_option("--report", bench_cfg.report_path,
                    "CSV report: world_size,median_ms,speedup,rows_out. Times cover the whole distributed "
                    "operator (shuffle included, loading excluded)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      gen_cfg.schema = parse_dtypes(gen_schema);
      for (const auto& path : cmd_generate(gen_cfg)) {
        const auto rows = io::read_csv(path).num_rows();
        std::cout << path << " " << rows << " rows\n";
      }
      return kExitOk;
    }
    if (run->parsed()) {
      run_cfg.op = run_op.build();
      run_cfg.inputs = run_in.build();
      run_cfg.transport = comm::parse_transport_kind(transport);
      if (run_cfg.transport == comm::TransportKind::Tcp && run->count("--world-size") == 0) run_cfg.world_size = 0;
      run_cfg.connect_timeout = comm::Millis(connect_ms);
      run_cfg.recv_timeout = comm::Millis(recv_ms);
      for (const auto& rec : cmd_run(run_cfg)) {
        std::cout << "rank " << rec.rank << ": " << rec.rows_out << " rows out, op " << rec.op_wall_clock_ms
                  << " ms, total " << rec.total_wall_clock_ms << " ms\n";
      }
      return kExitOk;
    }
    if (ver->parsed()) {
      VerifyConfig cfg;
      cfg.op = ver_op.build();
      cfg.inputs = ver_in.build();
      cfg.outputs = ver_outputs;
      if (!ver_template.empty()) {
        if (ver_world == 0) throw UsageError("--output template needs --world-size");
        for (size_t r = 0; r < ver_world; ++r) cfg.outputs.push_back(expand_rank(ver_template, r));
      }
      const auto res = cmd_verify(cfg);
      std::cout << res.message << "\n";
      std::cout << "expected_rows=" << res.expected_rows << " actual_rows=" << res.actual_rows;
      if (res.key_count_identity) std::cout << " key_count_identity=" << *res.key_count_identity;
      std::cout << "\n";
      return res.ok ? kExitOk : kExitFailure;
    }
    if (bench->parsed()) {
      bench_cfg.op = bench_op.build();
      bench_cfg.mode = mode == "weak" ? BenchMode::Weak : BenchMode::Strong;
      const auto rows = cmd_bench(bench_cfg);
      std::cout << "world_size,median_ms,speedup,rows_out,per_worker_median_ms\n";
      for (const auto& r : rows) {
        std::cout << r.world_size << "," << r.median_ms << "," << r.speedup << "," << r.rows_out << ",";
        for (size_t i = 0; i < r.per_worker_median_ms.size(); ++i) {
          std::cout << (i ? ";" : "") << r.per_worker_median_ms[i];
        }
        std::cout << "\n";
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace tessera::cli
