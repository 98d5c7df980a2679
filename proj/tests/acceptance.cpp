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

// Acceptance suite: one PASS/FAIL/SKIP line per top-level criterion.
//
//   acceptance                  run everything
//   acceptance --only NAME      run one criterion
//   acceptance --skip NAME      run all but one
//
// Exit status: 1 if anything failed, else 77 if anything was skipped, else 0.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "commands.hpp"
#include "support/oracle.hpp"
#include "support/ports.hpp"
#include "tessera/comm/frame.hpp"
#include "tessera/dist_ops.hpp"
#include "tessera/io.hpp"

using namespace tessera;
using oracle::Row;
namespace fs = std::filesystem;

namespace {

// Pinned limits.
constexpr size_t kJoinPairs = 240;
constexpr size_t kMaxRows = 200;
constexpr size_t kKeyCardinality = 16;
constexpr double kJoinSeconds = 60;
constexpr double kDistributedSeconds = 120;
constexpr size_t kFrameTables = 600;
constexpr size_t kFuzzMutations = 20000;
constexpr size_t kCsvTables = 200;
constexpr uint64_t kStrongRows = 2'000'000;
constexpr uint64_t kWeakRowsPerWorker = 100'000;
constexpr double kMinStrongSpeedup = 1.5;
constexpr double kMaxWeakRatio = 3.0;
constexpr unsigned kScalingCores = 4;

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double v, int prec = 2) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(prec);
  s << v;
  return s.str();
}

const JoinType kTypes[] = {JoinType::Inner, JoinType::Left, JoinType::Right, JoinType::FullOuter};

Outcome joins() {
  const auto t0 = Clock::now();
  oracle::Gen g(1001);
  size_t checks = 0, rows = 0;
  for (size_t i = 0; i < kJoinPairs; ++i) {
    const auto c = oracle::join_case(g, kMaxRows, kKeyCardinality, 0.1);
    for (auto type : kTypes) {
      const auto expect = oracle::nested_loop_join(c.left, c.right, type, c.left_keys, c.right_keys);
      for (auto algo : {JoinAlgorithm::Hash, JoinAlgorithm::Sort}) {
        const Table got = join(c.left, c.right, JoinConfig{type, algo, c.left_keys, c.right_keys});
        if (!oracle::same_multiset(got, expect)) {
          return {Status::Fail, "pair " + std::to_string(i) + " " + std::string(join_type_name(type)) + "/" +
                                    std::string(join_algorithm_name(algo)) + ": " + std::to_string(got.num_rows()) +
                                    " rows vs oracle " + std::to_string(expect.size())};
        }
        ++checks;
        rows += expect.size();
      }
    }
  }
  const double s = seconds_since(t0);
  const std::string d = std::to_string(kJoinPairs) + " pairs, " + std::to_string(checks) + " comparisons, " +
                        std::to_string(rows) + " oracle rows, " + fmt(s) + " s (limit " + fmt(kJoinSeconds, 0) + " s)";
  return {s < kJoinSeconds ? Status::Pass : Status::Fail, d};
}

// Same-schema pairs: planted-overlap pairs, plus each join-corpus left table
// against a resampled, partly fresh copy of itself.
std::pair<Table, Table> set_pair(oracle::Gen& g, size_t i) {
  if (i % 2 == 0) return oracle::set_case(g, kMaxRows);
  const Table a = oracle::join_case(g, kMaxRows, kKeyCardinality, 0.1).left;
  std::vector<uint64_t> idx;
  for (size_t k = 0, n = a.num_rows() ? g.below(a.num_rows() + 1) : 0; k < n; ++k) idx.push_back(g.below(a.num_rows()));
  const Table fresh = g.table(a.schema(), g.below(kMaxRows / 2 + 1), kKeyCardinality, 0.1);
  return {a, concat({take_rows(a, idx), fresh})};
}

Outcome set_ops() {
  oracle::Gen g(1002);
  size_t checks = 0;
  for (size_t i = 0; i < kJoinPairs; ++i) {
    const auto [a, b] = set_pair(g, i);
    const Table u = union_distinct(a, b), x = intersect_distinct(a, b), d = difference_distinct(a, b);
    const bool ok = oracle::same_multiset(u, oracle::set_union(a, b)) &&
                    oracle::same_multiset(x, oracle::set_intersect(a, b)) &&
                    oracle::same_multiset(d, oracle::set_symmetric_difference(a, b));
    if (!ok) return {Status::Fail, "pair " + std::to_string(i) + " differs from the set oracle"};
    if (oracle::has_duplicates(u) || oracle::has_duplicates(x) || oracle::has_duplicates(d)) {
      return {Status::Fail, "pair " + std::to_string(i) + " produced duplicate rows"};
    }
    checks += 3;
  }
  return {Status::Pass, std::to_string(kJoinPairs) + " pairs, " + std::to_string(checks) + " comparisons, no duplicates"};
}

// Splits `t` into `ws` uneven pieces.
std::vector<Table> scatter(oracle::Gen& g, const Table& t, size_t ws) {
  std::vector<std::vector<uint64_t>> idx(ws);
  for (size_t r = 0; r < t.num_rows(); ++r) idx[g.below(ws)].push_back(r);
  std::vector<Table> out;
  for (auto& i : idx) out.push_back(take_rows(t, i));
  return out;
}

enum class Op { Join, Union, Intersect, Difference, Select, Project };
const Op kOps[] = {Op::Join, Op::Union, Op::Intersect, Op::Difference, Op::Select, Op::Project};
const char* op_name(Op op) {
  static const char* names[] = {"join", "union", "intersect", "difference", "select", "project"};
  return names[static_cast<int>(op)];
}

struct OpCase {
  Table a;
  Table b;
  JoinConfig join;
  Predicate pred = Predicate::constant(true);
  std::vector<size_t> cols;
};

Table serial(Op op, const OpCase& c) {
  switch (op) {
    case Op::Join:
      return join(c.a, c.b, c.join);
    case Op::Union:
      return union_distinct(c.a, c.b);
    case Op::Intersect:
      return intersect_distinct(c.a, c.b);
    case Op::Difference:
      return difference_distinct(c.a, c.b);
    case Op::Select:
      return select(c.a, c.pred);
    case Op::Project:
      return project(c.a, c.cols);
  }
  return c.a;
}

DistributedTable distributed(Op op, const OpCase& c, const DistributedTable& a, const DistributedTable& b) {
  switch (op) {
    case Op::Join:
      return distributed_join(a, b, c.join);
    case Op::Union:
      return distributed_union(a, b);
    case Op::Intersect:
      return distributed_intersect(a, b);
    case Op::Difference:
      return distributed_difference(a, b);
    case Op::Select:
      return distributed_select(a, c.pred);
    case Op::Project:
      return distributed_project(a, c.cols);
  }
  return a;
}

// Joins use the join corpus; the others share one schema between a and b.
OpCase make_case(oracle::Gen& g, Op op, size_t max_rows) {
  if (op == Op::Join) {
    auto jc = oracle::join_case(g, max_rows, kKeyCardinality, 0.1);
    return {jc.left, jc.right, JoinConfig{kTypes[g.below(4)], g.chance(0.5) ? JoinAlgorithm::Hash : JoinAlgorithm::Sort,
                                          jc.left_keys, jc.right_keys}};
  }
  auto [a, b] = oracle::set_case(g, max_rows);
  OpCase c{a, b, {}};
  const size_t n = a.num_columns();
  for (size_t k = 0, m = 1 + g.below(3); k < m; ++k) c.cols.push_back(g.below(n));
  const size_t col = g.below(n);
  const Value lit = g.value(a.schema().field(col).dtype, 4, 0.0);
  c.pred = Predicate::compare(col, static_cast<CompareOp>(g.below(6)), lit) || Predicate::compare(0, CompareOp::Ne, g.value(a.schema().field(0).dtype, 4, 0.0));
  return c;
}

// Runs `op` on `ws` in-process workers and gathers the result at rank 0.
Table run_gathered(Op op, const OpCase& c, const std::vector<Table>& a, const std::vector<Table>& b, size_t ws) {
  std::optional<Table> root;
  comm::run_in_process(ws, [&](comm::WorkerContext& ctx) {
    const DistributedTable da{&ctx, a[ctx.rank()]}, db{&ctx, b[ctx.rank()]};
    auto g = comm::gather(ctx, distributed(op, c, da, db).local, 0);
    if (ctx.rank() == 0) root = std::move(g);
  });
  return *root;
}

Outcome distributed_equals_serial() {
  const auto t0 = Clock::now();
  oracle::Gen g(1003);
  size_t checks = 0;
  for (size_t ws : {1, 2, 3, 4, 8}) {
    for (Op op : kOps) {
      for (int it = 0; it < 12; ++it) {
        const OpCase c = make_case(g, op, kMaxRows);
        const Table expect = serial(op, c);
        const Table got = run_gathered(op, c, scatter(g, c.a, ws), scatter(g, c.b, ws), ws);
        if (!oracle::same_multiset(got, oracle::rows_of(expect))) {
          return {Status::Fail, std::string(op_name(op)) + " at world size " + std::to_string(ws) + ", case " +
                                    std::to_string(it) + ": " + std::to_string(got.num_rows()) + " rows vs serial " +
                                    std::to_string(expect.num_rows())};
        }
        ++checks;
      }
    }
    // A larger generated join per world size.
    io::GenerateSpec spec;
    spec.num_rows = 10000;
    spec.key_cardinality = 5000;
    spec.seed = 40 + ws;
    const Table l = io::generate_table(spec);
    spec.seed = 80 + ws;
    const Table r = io::generate_table(spec);
    const OpCase c{l, r, JoinConfig::inner_join(0, 0)};
    const Table got = run_gathered(Op::Join, c, scatter(g, l, ws), scatter(g, r, ws), ws);
    if (!oracle::same_multiset(got, oracle::nested_loop_join(l, r, JoinType::Inner, {0}, {0}))) {
      return {Status::Fail, "10^4-row join at world size " + std::to_string(ws)};
    }
    ++checks;
  }
  const double s = seconds_since(t0);
  return {s < kDistributedSeconds ? Status::Pass : Status::Fail,
          "world sizes {1,2,3,4,8} x 6 operators, " + std::to_string(checks) + " comparisons, " + fmt(s) +
              " s (limit " + fmt(kDistributedSeconds, 0) + " s)"};
}

// Runs `fn` on `ws` TCP-on-loopback workers, one thread each.
void run_tcp(size_t ws, const std::function<void(comm::WorkerContext&)>& fn) {
  const auto addrs = support::free_loopback_addresses(ws);
  std::vector<std::thread> threads;
  std::mutex mu;
  std::exception_ptr err;
  for (size_t r = 0; r < ws; ++r) {
    threads.emplace_back([&, r] {
      try {
        comm::ContextConfig cfg;
        cfg.world_size = ws;
        cfg.rank = r;
        cfg.transport = comm::TransportKind::Tcp;
        cfg.peer_addresses = addrs;
        cfg.connect_timeout = comm::Millis(20'000);
        cfg.recv_timeout = comm::Millis(60'000);
        comm::WorkerContext ctx = comm::init_context(cfg);
        fn(ctx);
      } catch (...) {
        std::lock_guard lk(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (err) std::rethrow_exception(err);
}

Outcome cross_transport() {
  const size_t ws = 4;
  io::GenerateSpec spec;
  spec.num_rows = 20000;
  spec.key_cardinality = 8000;
  spec.seed = 7;
  const Table l = io::generate_table(spec);
  spec.seed = 8;
  const Table r = concat({io::generate_table(spec), io::row_block(l, 0, 3)});
  std::vector<Table> ls, rs;
  for (size_t w = 0; w < ws; ++w) {
    ls.push_back(io::row_block(l, w, ws));
    rs.push_back(io::row_block(r, w, ws));
  }
  OpCase c{l, r, JoinConfig::full_outer_join(0, 0, JoinAlgorithm::Hash)};
  c.pred = parse_predicate("c1 > 0.25 and c0 < 4000");
  c.cols = {3, 0};

  // Every operator runs on the same context, one after another.
  auto pipeline = [&](comm::WorkerContext& ctx, std::vector<std::optional<Table>>& out) {
    const DistributedTable a{&ctx, ls[ctx.rank()]}, b{&ctx, rs[ctx.rank()]};
    for (size_t i = 0; i < std::size(kOps); ++i) {
      auto g = comm::gather(ctx, distributed(kOps[i], c, a, b).local, 0);
      if (ctx.rank() == 0) out[i] = std::move(g);
    }
  };
  std::vector<std::optional<Table>> local(std::size(kOps)), tcp(std::size(kOps));
  comm::run_in_process(ws, [&](comm::WorkerContext& ctx) { pipeline(ctx, local); });
  run_tcp(ws, [&](comm::WorkerContext& ctx) { pipeline(ctx, tcp); });
  size_t rows = 0;
  for (size_t i = 0; i < std::size(kOps); ++i) {
    if (!(local[i]->schema() == tcp[i]->schema()) || !oracle::identical(*local[i], *tcp[i])) {
      return {Status::Fail, std::string(op_name(kOps[i])) + " gathered output differs between transports"};
    }
    rows += local[i]->num_rows();
  }
  return {Status::Pass, "4 workers, 6 operators, " + std::to_string(rows) + " gathered rows identical in order and value"};
}

Outcome serialization() {
  oracle::Gen g(1005);
  size_t zero_row = 0, all_null = 0;
  std::vector<std::vector<uint8_t>> frames;
  for (size_t i = 0; i < kFrameTables; ++i) {
    const Schema s = g.schema(1 + g.below(5));
    const size_t rows = i % 10 == 0 ? 0 : g.below(100);
    const bool nulls = i % 7 == 0;
    const Table t = g.wide_table(s, rows, nulls ? 1.0 : 0.15);
    zero_row += rows == 0;
    all_null += nulls && rows > 0;
    auto f = comm::serialize_table(t);
    const Table back = comm::deserialize_table(f);
    if (!(back.schema() == t.schema()) || !oracle::identical(back, t)) {
      return {Status::Fail, "table " + std::to_string(i) + " did not round-trip"};
    }
    frames.push_back(std::move(f));
  }
  size_t decoded = 0, rejected = 0;
  for (size_t m = 0; m < kFuzzMutations; ++m) {
    auto f = frames[g.below(frames.size())];
    for (size_t k = 0, n = 1 + g.below(4); k < n; ++k) {
      switch (g.below(3)) {
        case 0:
          f[g.below(f.size())] ^= static_cast<uint8_t>(1u << g.below(8));
          break;
        case 1:
          f[g.below(f.size())] = static_cast<uint8_t>(g.below(256));
          break;
        default:
          f.resize(g.below(f.size() + 1));
          if (f.empty()) f.push_back(0);
      }
    }
    try {
      const Table t = comm::deserialize_table(f);
      (void)comm::serialize_table(t);
      ++decoded;
    } catch (const comm::FrameError&) {
      ++rejected;
    }
  }
  return {Status::Pass, std::to_string(kFrameTables) + " tables (" + std::to_string(zero_row) + " zero-row, " +
                            std::to_string(all_null) + " all-null) round-trip; " + std::to_string(kFuzzMutations) +
                            " fuzzed frames: " + std::to_string(decoded) + " decoded, " + std::to_string(rejected) +
                            " rejected, no crash"};
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("tessera_acceptance_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& n) const { return (path / n).string(); }
};

Outcome csv_round_trip() {
  TempDir dir;
  oracle::Gen g(1006);
  size_t rows = 0, quoted = 0, floats = 0;
  for (size_t i = 0; i < kCsvTables; ++i) {
    const Schema s = g.schema(1 + g.below(5));
    const Table t = g.wide_table(s, i % 10 == 0 ? 0 : g.below(100), i % 13 == 0 ? 1.0 : 0.15);
    std::vector<DType> types;
    for (const auto& f : s.fields()) types.push_back(f.dtype);
    const std::string path = dir.file("t" + std::to_string(i) + ".csv");
    io::write_csv(t, path);
    const Table back = io::read_csv(path, io::CsvReadOptions{}.with_schema(types));
    if (!oracle::identical(back, t)) return {Status::Fail, "table " + std::to_string(i) + " did not round-trip"};
    rows += t.num_rows();
    for (size_t c = 0; c < t.num_columns(); ++c) {
      for (size_t r = 0; r < t.num_rows(); ++r) {
        if (!t.column(c).is_valid(r)) continue;
        if (s.field(c).dtype == DType::Float64) ++floats;
        if (s.field(c).dtype == DType::Utf8) {
          const auto v = t.column(c).utf8_at(r);
          quoted += v.empty() || v.find_first_of(",\"\r\n") != std::string_view::npos;
        }
      }
    }
  }
  return {Status::Pass, std::to_string(kCsvTables) + " tables, " + std::to_string(rows) + " rows, " +
                            std::to_string(floats) + " floats, " + std::to_string(quoted) +
                            " quoted strings, value-identical"};
}

// Changes one value of one row in the first non-empty output; returns false
// if every output is empty.
bool tamper(const std::vector<std::string>& outputs, oracle::Gen& g) {
  for (const auto& path : outputs) {
    const Table t = io::read_csv(path);
    if (t.num_rows() == 0) continue;
    auto rows = oracle::rows_of(t);
    Row& row = rows[g.below(rows.size())];
    for (auto& v : row) {
      if (auto* i = std::get_if<int64_t>(&v)) {
        *i += 1000003;
        io::write_csv(oracle::build(t.schema(), rows), path);
        return true;
      }
      if (auto* d = std::get_if<double>(&v)) {
        *d += 1.5;
        io::write_csv(oracle::build(t.schema(), rows), path);
        return true;
      }
    }
  }
  return false;
}

Outcome verification() {
  TempDir dir;
  oracle::Gen g(1007);
  io::GenerateSpec spec;
  spec.num_rows = 3000;
  spec.key_cardinality = 1500;
  spec.seed = 11;
  const Table l = io::generate_table(spec);
  spec.seed = 12;
  // Right side overlaps the left so that intersect and difference are non-empty.
  const Table r = concat({io::generate_table(spec), io::row_block(l, 1, 2)});
  io::write_csv(l, dir.file("left.csv"));
  io::write_csv(r, dir.file("right.csv"));

  size_t passes = 0, caught = 0;
  for (const char* op : {"join", "union", "intersect", "difference", "select", "project"}) {
    for (size_t ws : {1, 2, 4}) {
      cli::RunConfig run;
      run.op.op = cli::parse_op(op);
      run.op.predicate = "c1 > 0.5";
      run.op.columns = {0, 2};
      run.inputs.left = {dir.file("left.csv")};
      if (cli::is_binary(run.op.op)) run.inputs.right = {dir.file("right.csv")};
      run.world_size = ws;
      const std::string prefix = std::string(op) + "_" + std::to_string(ws);
      run.output_template = dir.file(prefix + "_{rank}.csv");
      cli::cmd_run(run);

      cli::VerifyConfig v;
      v.op = run.op;
      v.inputs = run.inputs;
      for (size_t k = 0; k < ws; ++k) v.outputs.push_back(cli::expand_rank(run.output_template, k));
      const auto ok = cli::cmd_verify(v);
      if (!ok.ok) return {Status::Fail, std::string(op) + " at world size " + std::to_string(ws) + ": " + ok.message};
      ++passes;
      if (!tamper(v.outputs, g)) return {Status::Fail, std::string(op) + ": no output row to tamper with"};
      const auto bad = cli::cmd_verify(v);
      if (bad.ok) return {Status::Fail, std::string(op) + " at world size " + std::to_string(ws) + ": tampered row not detected"};
      ++caught;
    }
  }
  return {Status::Pass, std::to_string(passes) + " honest runs verified, " + std::to_string(caught) + "/" +
                            std::to_string(passes) + " single-row tampers detected"};
}

Outcome scaling() {
  const unsigned cores = std::thread::hardware_concurrency();
  fs::create_directories("scaling");
  cli::BenchConfig strong;
  strong.mode = cli::BenchMode::Strong;
  strong.total_rows = kStrongRows;
  strong.workers = {1, 2, 4};
  strong.repetitions = 3;
  strong.report_path = "scaling/strong.csv";
  const auto s = cli::cmd_bench(strong);
  cli::BenchConfig weak = strong;
  weak.mode = cli::BenchMode::Weak;
  weak.rows_per_worker = kWeakRowsPerWorker;
  weak.report_path = "scaling/weak.csv";
  const auto w = cli::cmd_bench(weak);

  const double speedup4 = s.back().speedup;
  const double weak_ratio = w.back().median_ms / w.front().median_ms;
  const std::string d = "strong 2e6 rows: median ms " + fmt(s[0].median_ms, 1) + "/" + fmt(s[1].median_ms, 1) + "/" +
                        fmt(s[2].median_ms, 1) + " at 1/2/4 workers, speedup@4 " + fmt(speedup4) + " (need >= " +
                        fmt(kMinStrongSpeedup, 1) + "); weak 1e5 rows/worker: ratio@4 " + fmt(weak_ratio) +
                        " (need <= " + fmt(kMaxWeakRatio, 1) + "); reports in scaling/";
  if (cores < kScalingCores) {
    return {Status::Skip, "needs >= " + std::to_string(kScalingCores) + " cores, machine has " +
                              std::to_string(cores) + "; measured " + d};
  }
  const bool ok = speedup4 >= kMinStrongSpeedup && weak_ratio <= kMaxWeakRatio;
  return {ok ? Status::Pass : Status::Fail, d};
}

struct Criterion {
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {"join-oracle-equivalence", joins},
    {"set-op-oracle-equivalence", set_ops},
    {"distributed-equals-serial", distributed_equals_serial},
    {"cross-transport-equality", cross_transport},
    {"frame-serialization", serialization},
    {"csv-round-trip", csv_round_trip},
    {"scaling", scaling},
    {"verification-discipline", verification},
};

}  // namespace

int main(int argc, char** argv) {
  std::string only, skip;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--only") {
      only = argv[i + 1];
    } else if (flag == "--skip") {
      skip = argv[i + 1];
    } else {
      std::fprintf(stderr, "usage: acceptance [--only NAME | --skip NAME]\n");
      return 2;
    }
  }
  bool failed = false, skipped = false;
  for (const auto& c : kCriteria) {
    if ((!only.empty() && only != c.name) || skip == c.name) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    std::printf("%s  %-27s %s\n", tag, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed |= o.status == Status::Fail;
    skipped |= o.status == Status::Skip;
  }
  return failed ? 1 : (skipped ? 77 : 0);
}
