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
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <future>
#include <sstream>

#include "tessera/io.hpp"

namespace tessera::io {

namespace {

struct CsvField {
  std::string text;
  bool quoted = false;
};

// Splits RFC 4180 records one at a time, tracking physical line numbers.
class Tokenizer {
 public:
  Tokenizer(std::string_view text, char delim, const std::string& origin)
      : text_(text), delim_(delim), origin_(origin) {}

  bool done() const { return pos_ >= text_.size(); }
  size_t line() const { return record_line_; }

  // Fills `fields` with the next record; false at end of input.
  bool next(std::vector<CsvField>& fields) {
    if (done()) return false;
    record_line_ = line_;
    size_t n = 0;
    for (;;) {
      if (n == fields.size()) fields.emplace_back();
      CsvField& f = fields[n++];
      f.text.clear();
      f.quoted = false;
      const bool more = read_field(f);
      if (!more) break;
    }
    fields.resize(n);
    return true;
  }

 private:
  // Returns true if another field follows on this record.
  bool read_field(CsvField& f) {
    if (pos_ < text_.size() && text_[pos_] == '"') {
      f.quoted = true;
      ++pos_;
      for (;;) {
        if (pos_ >= text_.size()) {
          throw CsvError(origin_ + ":" + std::to_string(record_line_) + ": unterminated quoted field");
        }
        const char c = text_[pos_];
        if (c == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            f.text.push_back('"');
            pos_ += 2;
            continue;
          }
          ++pos_;
          break;
        }
        if (c == '\n') ++line_;
        f.text.push_back(c);
        ++pos_;
      }
      if (pos_ >= text_.size()) return false;
      const char c = text_[pos_];
      if (c == delim_) {
        ++pos_;
        return true;
      }
      if (end_of_line()) return false;
      throw CsvError(origin_ + ":" + std::to_string(line_) + ": unexpected character after closing quote");
    }
    const size_t start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == delim_) {
        f.text.assign(text_.substr(start, pos_ - start));
        ++pos_;
        return true;
      }
      if (c == '\n' || (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n')) break;
      if (c == '"') throw CsvError(origin_ + ":" + std::to_string(line_) + ": quote inside unquoted field");
      ++pos_;
    }
    f.text.assign(text_.substr(start, pos_ - start));
    if (pos_ < text_.size()) end_of_line();
    return false;
  }

  bool end_of_line() {
    if (text_[pos_] == '\n') {
      ++pos_;
      ++line_;
      return true;
    }
    if (text_[pos_] == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
      pos_ += 2;
      ++line_;
      return true;
    }
    return false;
  }

  std::string_view text_;
  char delim_;
  const std::string& origin_;
  size_t pos_ = 0;
  size_t line_ = 1;
  size_t record_line_ = 1;
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

bool parse_int64(std::string_view s, int64_t& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_float64(std::string_view s, double& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_bool(std::string_view s, bool& out) {
  if (iequals(s, "true")) {
    out = true;
    return true;
  }
  if (iequals(s, "false")) {
    out = false;
    return true;
  }
  return false;
}

bool is_null_field(const CsvField& f, const CsvReadOptions& opts) {
  if (f.quoted) return false;
  return f.text.empty() || (!opts.null_token.empty() && f.text == opts.null_token);
}

struct Inference {
  bool can_int = true;
  bool can_float = true;
  bool can_bool = true;
  bool seen = false;

  void observe(const CsvField& f) {
    seen = true;
    if (f.quoted && f.text.empty()) {
      can_int = can_float = can_bool = false;
      return;
    }
    int64_t i;
    double d;
    bool b;
    if (can_int && !parse_int64(f.text, i)) can_int = false;
    if (can_float && !parse_float64(f.text, d)) can_float = false;
    if (can_bool && !parse_bool(f.text, b)) can_bool = false;
  }

  DType result() const {
    if (!seen) return DType::Utf8;
    if (can_int) return DType::Int64;
    if (can_float) return DType::Float64;
    if (can_bool) return DType::Bool;
    return DType::Utf8;
  }
};

void append_field(ColumnBuilder& b, const CsvField& f, const CsvReadOptions& opts, const std::string& origin,
                  size_t line, size_t col, bool inferred) {
  if (is_null_field(f, opts)) {
    b.append_null();
    return;
  }
  auto fail = [&]() -> void {
    throw CsvError(origin + ":" + std::to_string(line) + ": column " + std::to_string(col + 1) + ": cannot parse '" +
                   f.text + "' as " + std::string(dtype_name(b.dtype())) + (inferred ? " (inferred)" : ""));
  };
  switch (b.dtype()) {
    case DType::Int64: {
      if (f.quoted && f.text.empty()) return b.append_null();
      int64_t v;
      if (!parse_int64(f.text, v)) fail();
      b.append_int64(v);
      break;
    }
    case DType::Float64: {
      if (f.quoted && f.text.empty()) return b.append_null();
      double v;
      if (!parse_float64(f.text, v)) fail();
      b.append_float64(v);
      break;
    }
    case DType::Bool: {
      if (f.quoted && f.text.empty()) return b.append_null();
      bool v;
      if (!parse_bool(f.text, v)) fail();
      b.append_bool(v);
      break;
    }
    case DType::Utf8:
      b.append_utf8(f.text);
      break;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return std::move(ss).str();
}

}  // namespace

Table parse_csv(std::string_view text, const CsvReadOptions& opts, const std::string& origin) {
  if (opts.delimiter == '\r' || opts.delimiter == '\n' || opts.delimiter == '"') {
    throw InvalidArgument("CSV delimiter cannot be CR, LF or a quote");
  }
  Tokenizer tok(text, opts.delimiter, origin);
  std::vector<CsvField> fields;

  std::vector<std::string> names;
  size_t ncols = 0;
  if (opts.has_header) {
    if (tok.next(fields)) {
      for (const auto& f : fields) names.push_back(f.text);
      ncols = names.size();
    } else if (!opts.schema) {
      throw CsvError(origin + ": empty file has no header");
    }
  }
  if (opts.schema) {
    if (ncols != 0 && opts.schema->size() != ncols) {
      throw CsvError(origin + ": header has " + std::to_string(ncols) + " columns but the schema lists " +
                     std::to_string(opts.schema->size()));
    }
    ncols = opts.schema->size();
  }

  struct Record {
    std::vector<CsvField> fields;
    size_t line;
  };
  std::vector<Record> sample;
  const size_t sample_limit = opts.schema ? 1 : std::max<size_t>(opts.infer_rows, 1);
  auto check_width = [&](const std::vector<CsvField>& rec, size_t line) {
    if (ncols == 0) ncols = rec.size();
    if (rec.size() != ncols) {
      throw CsvError(origin + ":" + std::to_string(line) + ": expected " + std::to_string(ncols) + " fields, found " +
                     std::to_string(rec.size()));
    }
  };
  while (sample.size() < sample_limit && tok.next(fields)) {
    check_width(fields, tok.line());
    sample.push_back({fields, tok.line()});
  }
  if (ncols == 0) throw CsvError(origin + ": no columns");

  std::vector<DType> dtypes;
  if (opts.schema) {
    dtypes = *opts.schema;
  } else {
    std::vector<Inference> inf(ncols);
    for (const auto& rec : sample) {
      for (size_t c = 0; c < ncols; ++c) {
        if (!is_null_field(rec.fields[c], opts)) inf[c].observe(rec.fields[c]);
      }
    }
    for (const auto& i : inf) dtypes.push_back(i.result());
  }
  if (names.empty()) {
    for (size_t c = 0; c < ncols; ++c) names.push_back("c" + std::to_string(c));
  }

  std::vector<ColumnBuilder> builders;
  for (auto dt : dtypes) builders.emplace_back(dt);
  const bool inferred = !opts.schema;
  auto add = [&](const std::vector<CsvField>& rec, size_t line) {
    for (size_t c = 0; c < ncols; ++c) append_field(builders[c], rec[c], opts, origin, line, c, inferred);
  };
  for (const auto& rec : sample) add(rec.fields, rec.line);
  sample.clear();
  while (tok.next(fields)) {
    check_width(fields, tok.line());
    add(fields, tok.line());
  }

  std::vector<Field> schema_fields;
  std::vector<Column> cols;
  for (size_t c = 0; c < ncols; ++c) {
    schema_fields.push_back({names[c], dtypes[c]});
    cols.push_back(builders[c].finish());
  }
  return Table(Schema(std::move(schema_fields)), std::move(cols));
}

Table read_csv(const std::string& path, const CsvReadOptions& opts) {
  const std::string text = read_file(path);
  return parse_csv(text, opts, path);
}

std::vector<Table> read_csv_many(const std::vector<std::string>& paths, const CsvReadOptions& opts) {
  std::vector<Table> out;
  out.reserve(paths.size());
  if (!opts.use_threads || paths.size() <= 1) {
    for (const auto& p : paths) out.push_back(read_csv(p, opts));
    return out;
  }
  std::vector<std::future<Table>> futures;
  futures.reserve(paths.size());
  for (const auto& p : paths) futures.push_back(std::async(std::launch::async, [&opts, p] { return read_csv(p, opts); }));
  // Wait for all before rethrowing so no parse outlives the call.
  for (auto& f : futures) f.wait();
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

// -- writer -----------------------------------------------------------------

namespace {

void append_quoted(std::string& out, std::string_view s, char delim) {
  const bool needs = s.empty() || s.find_first_of(std::string{delim, '"', '\r', '\n'}) != std::string_view::npos;
  if (!needs) {
    out.append(s);
    return;
  }
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

void append_cell(std::string& out, const Column& c, size_t row, char delim) {
  if (!c.is_valid(row)) return;
  char buf[64];
  switch (c.dtype()) {
    case DType::Int64: {
      auto r = std::to_chars(buf, buf + sizeof(buf), c.int64_at(row));
      out.append(buf, r.ptr);
      break;
    }
    case DType::Float64: {
      auto r = std::to_chars(buf, buf + sizeof(buf), c.float64_at(row));
      out.append(buf, r.ptr);
      break;
    }
    case DType::Bool:
      out.append(c.bool_at(row) ? "true" : "false");
      break;
    case DType::Utf8:
      append_quoted(out, c.utf8_at(row), delim);
      break;
  }
}

}  // namespace

std::string format_csv(const Table& table, const CsvWriteOptions& opts) {
  std::string out;
  out.reserve(table.num_rows() * table.num_columns() * 12 + 64);
  if (opts.write_header) {
    for (size_t c = 0; c < table.num_columns(); ++c) {
      if (c) out.push_back(opts.delimiter);
      append_quoted(out, table.schema().field(c).name, opts.delimiter);
    }
    out.push_back('\n');
  }
  for (size_t r = 0; r < table.num_rows(); ++r) {
    for (size_t c = 0; c < table.num_columns(); ++c) {
      if (c) out.push_back(opts.delimiter);
      append_cell(out, table.columns()[c], r, opts.delimiter);
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const Table& table, const std::string& path, const CsvWriteOptions& opts) {
  const std::string text = format_csv(table, opts);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("error writing '" + path + "'");
}

}  // namespace tessera::io
