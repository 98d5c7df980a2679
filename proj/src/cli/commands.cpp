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

#include "commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>

#include "json.hpp"
#include "tessera/dist_ops.hpp"
#include "tessera/reference.hpp"
#include "tessera/row_key.hpp"

namespace tessera::cli {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

Op parse_op(std::string_view s) {
  if (s == "join") return Op::Join;
  if (s == "union") return Op::Union;
  if (s == "intersect") return Op::Intersect;
  if (s == "difference") return Op::Difference;
  if (s == "select") return Op::Select;
  if (s == "project") return Op::Project;
  throw UsageError("unknown op '" + std::string(s) + "'");
}

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Join:
      return "join";
    case Op::Union:
      return "union";
    case Op::Intersect:
      return "intersect";
    case Op::Difference:
      return "difference";
    case Op::Select:
      return "select";
    case Op::Project:
      return "project";
  }
  return "?";
}

bool is_binary(Op op) { return op == Op::Join || op == Op::Union || op == Op::Intersect || op == Op::Difference; }

void OpConfig::validate() const {
  if (op == Op::Join) {
    if (join.left_keys.empty() || join.left_keys.size() != join.right_keys.size()) {
      throw UsageError("join needs the same non-zero number of --left-keys and --right-keys");
    }
  }
  if (op == Op::Project && columns.empty()) throw UsageError("project needs --columns");
  if (op == Op::Select) {
    try {
      parse_predicate(predicate);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
}

std::vector<DType> OpConfig::output_dtypes(const Schema& left, const Schema* right) const {
  std::vector<DType> out;
  switch (op) {
    case Op::Join:
      for (const auto& f : left.fields()) out.push_back(f.dtype);
      for (const auto& f : right->fields()) out.push_back(f.dtype);
      break;
    case Op::Project:
      for (size_t c : columns) out.push_back(left.field(c).dtype);
      break;
    default:
      for (const auto& f : left.fields()) out.push_back(f.dtype);
      break;
  }
  return out;
}

io::CsvReadOptions InputConfig::read_options() const {
  io::CsvReadOptions o;
  o.delimiter = delimiter;
  if (!schema.empty()) o.schema = schema;
  return o;
}

std::string expand_rank(const std::string& tmpl, size_t rank) {
  std::string out = tmpl;
  const std::string token = "{rank}";
  for (auto pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos)) {
    out.replace(pos, token.size(), std::to_string(rank));
  }
  return out;
}

std::string TimingRecord::to_json_line() const {
  nlohmann::ordered_json j;
  j["op"] = op;
  j["world_size"] = world_size;
  j["rank"] = rank;
  j["rows_in_left"] = rows_in_left;
  j["rows_in_right"] = rows_in_right;
  j["rows_out"] = rows_out;
  j["op_wall_clock_ms"] = op_wall_clock_ms;
  j["total_wall_clock_ms"] = total_wall_clock_ms;
  return j.dump();
}

TimingRecord TimingRecord::from_json_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  TimingRecord r;
  r.op = j.at("op").get<std::string>();
  r.world_size = j.at("world_size").get<size_t>();
  r.rank = j.at("rank").get<size_t>();
  r.rows_in_left = j.at("rows_in_left").get<uint64_t>();
  r.rows_in_right = j.at("rows_in_right").get<uint64_t>();
  r.rows_out = j.at("rows_out").get<uint64_t>();
  r.op_wall_clock_ms = j.at("op_wall_clock_ms").get<double>();
  r.total_wall_clock_ms = j.at("total_wall_clock_ms").get<double>();
  return r;
}

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

DistributedTable run_operator(const OpConfig& op, const DistributedTable& left, const DistributedTable* right) {
  switch (op.op) {
    case Op::Join:
      return distributed_join(left, *right, op.join);
    case Op::Union:
      return distributed_union(left, *right);
    case Op::Intersect:
      return distributed_intersect(left, *right);
    case Op::Difference:
      return distributed_difference(left, *right);
    case Op::Select:
      return distributed_select(left, parse_predicate(op.predicate));
    case Op::Project:
      return distributed_project(left, op.columns);
  }
  throw UsageError("unknown op");
}

void check_inputs(const RunConfig& cfg, size_t ws) {
  cfg.op.validate();
  if (cfg.inputs.left.empty()) throw UsageError("--left is required");
  if (is_binary(cfg.op.op) && cfg.inputs.right.empty()) {
    throw UsageError(std::string(op_name(cfg.op.op)) + " needs --right");
  }
  if (!is_binary(cfg.op.op) && !cfg.inputs.right.empty()) {
    throw UsageError(std::string(op_name(cfg.op.op)) + " takes no --right");
  }
  auto check = [&](const std::vector<std::string>& paths, const char* which) {
    if (!paths.empty() && paths.size() != 1 && paths.size() != ws) {
      throw UsageError(std::string("--") + which + " needs one path per worker (" + std::to_string(ws) +
                       ") or a single path to split; got " + std::to_string(paths.size()));
    }
  };
  check(cfg.inputs.left, "left");
  check(cfg.inputs.right, "right");
  if (cfg.output_template.empty()) throw UsageError("--output is required");
  if (ws > 1 && cfg.output_template.find("{rank}") == std::string::npos) {
    throw UsageError("--output must contain {rank} when more than one worker runs");
  }
}

// Reads this worker's left/right partitions, loading both concurrently. A
// relation given as a single file is split into contiguous row blocks.
std::pair<Table, std::optional<Table>> read_partitions(const InputConfig& in, size_t rank, size_t ws) {
  auto opts = in.read_options();
  opts.use_threads = true;
  auto pick = [&](const std::vector<std::string>& paths) { return paths.size() == 1 ? paths[0] : paths[rank]; };
  std::vector<std::string> files{pick(in.left)};
  if (!in.right.empty()) files.push_back(pick(in.right));
  auto tables = io::read_csv_many(files, opts);
  auto share = [&](const std::vector<std::string>& paths, const Table& t) {
    return paths.size() == 1 && ws > 1 ? io::row_block(t, rank, ws) : t;
  };
  Table left = share(in.left, tables[0]);
  std::optional<Table> right;
  if (tables.size() > 1) right = share(in.right, tables[1]);
  return {std::move(left), std::move(right)};
}

TimingRecord run_worker(comm::WorkerContext& ctx, const RunConfig& cfg) {
  const auto t_total = Clock::now();
  auto [left, right] = read_partitions(cfg.inputs, ctx.rank(), ctx.world_size());

  DistributedTable l{&ctx, std::move(left)};
  std::optional<DistributedTable> r;
  if (right) r = DistributedTable{&ctx, std::move(*right)};

  // Time only the operator: every worker has its inputs in memory at this point.
  ctx.barrier();
  const auto t_op = Clock::now();
  DistributedTable out = run_operator(cfg.op, l, r ? &*r : nullptr);
  const double op_ms = ms_since(t_op);

  const std::string path = expand_rank(cfg.output_template, ctx.rank());
  ensure_parent(path);
  io::write_csv(out.local, path);

  TimingRecord rec;
  rec.op = std::string(op_name(cfg.op.op));
  rec.world_size = ctx.world_size();
  rec.rank = ctx.rank();
  rec.rows_in_left = l.local.num_rows();
  rec.rows_in_right = r ? r->local.num_rows() : 0;
  rec.rows_out = out.local.num_rows();
  rec.op_wall_clock_ms = op_ms;
  rec.total_wall_clock_ms = std::max(ms_since(t_total), op_ms);
  return rec;
}

void write_timing(const RunConfig& cfg, const std::vector<TimingRecord>& records) {
  if (cfg.timing_path.empty()) return;
  if (cfg.transport == comm::TransportKind::InProcess) {
    ensure_parent(cfg.timing_path);
    std::ofstream out(cfg.timing_path, std::ios::trunc);
    if (!out) throw io::IoError("cannot write timing file '" + cfg.timing_path + "'");
    for (const auto& r : records) out << r.to_json_line() << '\n';
    return;
  }
  // One process per rank: either a file per rank or single-write appends.
  for (const auto& r : records) {
    const std::string path = expand_rank(cfg.timing_path, r.rank);
    ensure_parent(path);
    const std::string line = r.to_json_line() + "\n";
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) throw io::IoError("cannot write timing file '" + path + "'");
    const auto n = ::write(fd, line.data(), line.size());
    ::close(fd);
    if (n != static_cast<ssize_t>(line.size())) throw io::IoError("short write to timing file '" + path + "'");
  }
}

}  // namespace

std::vector<TimingRecord> cmd_run(const RunConfig& cfg) {
  if (cfg.transport == comm::TransportKind::InProcess) {
    if (cfg.world_size == 0) throw UsageError("--world-size must be >= 1");
    check_inputs(cfg, cfg.world_size);
    std::vector<TimingRecord> records(cfg.world_size);
    try {
      comm::run_in_process(
          cfg.world_size, [&](comm::WorkerContext& ctx) { records[ctx.rank()] = run_worker(ctx, cfg); },
          cfg.recv_timeout);
    } catch (...) {
      for (size_t r = 0; r < cfg.world_size; ++r) {
        std::error_code ec;
        fs::remove(expand_rank(cfg.output_template, r), ec);
      }
      throw;
    }
    write_timing(cfg, records);
    return records;
  }

  if (cfg.hosts_file.empty()) throw UsageError("tcp transport needs --hosts");
  const auto hosts = comm::read_hosts_file(cfg.hosts_file);
  if (cfg.world_size != 0 && cfg.world_size != hosts.size()) {
    throw UsageError("--world-size " + std::to_string(cfg.world_size) + " but hosts file lists " +
                     std::to_string(hosts.size()) + " peers");
  }
  if (cfg.rank >= hosts.size()) throw UsageError("--rank out of range for hosts file");
  check_inputs(cfg, hosts.size());
  const std::string own_output = expand_rank(cfg.output_template, cfg.rank);
  try {
    comm::ContextConfig cc;
    cc.world_size = hosts.size();
    cc.rank = cfg.rank;
    cc.transport = comm::TransportKind::Tcp;
    cc.peer_addresses = hosts;
    cc.connect_timeout = cfg.connect_timeout;
    cc.recv_timeout = cfg.recv_timeout;
    comm::WorkerContext ctx = comm::init_context(cc);
    std::vector<TimingRecord> records{run_worker(ctx, cfg)};
    ctx.barrier();
    write_timing(cfg, records);
    return records;
  } catch (...) {
    std::error_code ec;
    fs::remove(own_output, ec);
    throw;
  }
}

std::vector<std::string> cmd_generate(const GenerateConfig& cfg) {
  if (cfg.parts == 0) throw UsageError("--parts must be >= 1");
  if (cfg.out_prefix.empty()) throw UsageError("--out-prefix is required");
  io::GenerateSpec base;
  if (!cfg.schema.empty()) {
    std::vector<Field> fields;
    for (size_t i = 0; i < cfg.schema.size(); ++i) fields.push_back({"c" + std::to_string(i), cfg.schema[i]});
    base.schema = Schema(std::move(fields));
  }
  // Keys span the whole logical relation so parts can match each other.
  base.key_cardinality = cfg.key_cardinality.value_or(std::max<uint64_t>(cfg.rows, 1));
  std::vector<std::string> paths;
  for (size_t p = 0; p < cfg.parts; ++p) {
    io::GenerateSpec spec = base;
    spec.num_rows = io::block_rows(cfg.rows, p, cfg.parts);
    spec.seed = cfg.seed + p;
    const std::string path = cfg.out_prefix + "_" + std::to_string(p) + ".csv";
    ensure_parent(path);
    io::write_csv(io::generate_table(spec), path);
    paths.push_back(path);
  }
  return paths;
}

namespace {

Table read_all(const std::vector<std::string>& paths, const io::CsvReadOptions& opts) {
  auto tables = io::read_csv_many(paths, opts);
  return concat(tables);
}

uint64_t inner_join_identity(const Table& left, const Table& right, const JoinConfig& cfg) {
  std::map<std::string, std::pair<uint64_t, uint64_t>> counts;
  auto tally = [&](const Table& t, const std::vector<size_t>& keys, bool is_left) {
    for (size_t r = 0; r < t.num_rows(); ++r) {
      bool has_null = false;
      for (size_t k : keys) has_null |= !t.column(k).is_valid(r);
      if (has_null) continue;
      auto& c = counts[encode_row(t, r, keys).bytes];
      (is_left ? c.first : c.second) += 1;
    }
  };
  tally(left, cfg.left_keys, true);
  tally(right, cfg.right_keys, false);
  uint64_t total = 0;
  for (const auto& [k, c] : counts) total += c.first * c.second;
  return total;
}

}  // namespace

VerifyResult cmd_verify(const VerifyConfig& cfg) {
  cfg.op.validate();
  if (cfg.inputs.left.empty()) throw UsageError("--left is required");
  if (is_binary(cfg.op.op) && cfg.inputs.right.empty()) throw UsageError("verify of a binary op needs --right");
  if (cfg.outputs.empty()) throw UsageError("verify needs the run's output files");

  const auto opts = cfg.inputs.read_options();
  const Table left = read_all(cfg.inputs.left, opts);
  std::optional<Table> right;
  if (is_binary(cfg.op.op)) right = read_all(cfg.inputs.right, opts);

  Table expected = [&] {
    switch (cfg.op.op) {
      case Op::Join: {
        const double pairs = static_cast<double>(left.num_rows()) * static_cast<double>(right->num_rows());
        return pairs <= 4e7 ? reference::nested_loop_join(left, *right, cfg.op.join)
                            : reference::ordered_map_join(left, *right, cfg.op.join);
      }
      case Op::Union:
        return reference::set_union(left, *right);
      case Op::Intersect:
        return reference::set_intersect(left, *right);
      case Op::Difference:
        return reference::set_difference(left, *right);
      case Op::Select:
        return reference::row_select(left, parse_predicate(cfg.op.predicate));
      case Op::Project:
        return reference::row_project(left, cfg.op.columns);
    }
    throw UsageError("unknown op");
  }();

  io::CsvReadOptions out_opts;
  out_opts.schema = cfg.op.output_dtypes(left.schema(), right ? &right->schema() : nullptr);
  const Table actual = read_all(cfg.outputs, out_opts);

  VerifyResult res;
  res.expected_rows = expected.num_rows();
  res.actual_rows = actual.num_rows();
  if (cfg.op.op == Op::Join && cfg.op.join.join_type == JoinType::Inner) {
    res.key_count_identity = inner_join_identity(left, *right, cfg.op.join);
  }
  if (auto mismatch = reference::compare_multisets(expected, actual)) {
    res.ok = false;
    res.message = "MISMATCH: expected " + std::to_string(mismatch->expected_rows) + " rows, got " +
                  std::to_string(mismatch->actual_rows) + "; first difference at canonical position " +
                  std::to_string(mismatch->position) + ": " + mismatch->detail;
    return res;
  }
  if (res.key_count_identity && *res.key_count_identity != res.actual_rows) {
    res.ok = false;
    res.message = "MISMATCH: inner join produced " + std::to_string(res.actual_rows) +
                  " rows but the key-count identity gives " + std::to_string(*res.key_count_identity);
    return res;
  }
  res.ok = true;
  res.message = "OK: " + std::to_string(res.actual_rows) + " rows match the serial reference";
  return res;
}

// -- bench ------------------------------------------------------------------

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct BenchRun {
  double max_ms = 0;
  std::vector<double> per_worker_ms;
  uint64_t rows_out = 0;
};

BenchRun bench_once(const OpConfig& op, const std::vector<Table>& left_blocks, const std::vector<Table>& right_blocks) {
  const size_t ws = left_blocks.size();
  BenchRun run;
  run.per_worker_ms.assign(ws, 0);
  std::vector<uint64_t> rows(ws, 0);
  comm::run_in_process(ws, [&](comm::WorkerContext& ctx) {
    const size_t me = ctx.rank();
    DistributedTable l{&ctx, left_blocks[me]};
    DistributedTable r{&ctx, right_blocks[me]};
    ctx.barrier();
    const auto t0 = Clock::now();
    DistributedTable out = run_operator(op, l, is_binary(op.op) ? &r : nullptr);
    run.per_worker_ms[me] = ms_since(t0);
    rows[me] = out.local.num_rows();
  });
  run.max_ms = *std::max_element(run.per_worker_ms.begin(), run.per_worker_ms.end());
  for (auto n : rows) run.rows_out += n;
  return run;
}

BenchRow bench_world(const BenchConfig& cfg, size_t ws) {
  const uint64_t total = cfg.mode == BenchMode::Weak ? cfg.rows_per_worker * ws : cfg.total_rows;
  io::GenerateSpec ls;
  ls.num_rows = total;
  ls.seed = cfg.seed;
  ls.key_cardinality = std::max<uint64_t>(total, 1);
  io::GenerateSpec rs = ls;
  rs.seed = cfg.seed + 1;
  const Table left = io::generate_table(ls);
  const Table right = io::generate_table(rs);
  std::vector<Table> lb, rb;
  for (size_t w = 0; w < ws; ++w) {
    lb.push_back(io::row_block(left, w, ws));
    rb.push_back(io::row_block(right, w, ws));
  }
  std::vector<double> maxes;
  std::vector<std::vector<double>> per_worker(ws);
  BenchRow row;
  row.world_size = ws;
  for (size_t rep = 0; rep < cfg.repetitions; ++rep) {
    BenchRun run = bench_once(cfg.op, lb, rb);
    maxes.push_back(run.max_ms);
    for (size_t w = 0; w < ws; ++w) per_worker[w].push_back(run.per_worker_ms[w]);
    row.rows_out = run.rows_out;
  }
  row.median_ms = median(maxes);
  for (auto& v : per_worker) row.per_worker_median_ms.push_back(median(v));
  return row;
}

}  // namespace

std::vector<BenchRow> cmd_bench(const BenchConfig& cfg) {
  cfg.op.validate();
  if (cfg.workers.empty()) throw UsageError("--workers must list at least one world size");
  if (cfg.repetitions == 0) throw UsageError("--reps must be >= 1");
  for (size_t w : cfg.workers) {
    if (w == 0) throw UsageError("world sizes must be >= 1");
  }
  std::vector<BenchRow> rows;
  std::optional<double> serial;
  for (size_t w : cfg.workers) {
    rows.push_back(bench_world(cfg, w));
    if (w == 1) serial = rows.back().median_ms;
  }
  if (!serial) serial = bench_world(cfg, 1).median_ms;
  for (auto& r : rows) r.speedup = r.median_ms > 0 ? *serial / r.median_ms : 0.0;
  if (!cfg.report_path.empty()) write_bench_report(rows, cfg.report_path);
  return rows;
}

void write_bench_report(const std::vector<BenchRow>& rows, const std::string& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io::IoError("cannot write bench report '" + path + "'");
  out << "world_size,median_ms,speedup,rows_out\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%llu\n", r.world_size, r.median_ms, r.speedup,
                  static_cast<unsigned long long>(r.rows_out));
    out << buf;
  }
  if (!out) throw io::IoError("error writing bench report '" + path + "'");
}

}  // namespace tessera::cli
