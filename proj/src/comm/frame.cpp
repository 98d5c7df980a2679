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

#include "tessera/comm/frame.hpp"

#include <bit>
#include <cstring>
#include <string>

namespace tessera::comm {

namespace {

class Writer {
 public:
  void bytes(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(v);
    for (size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<uint8_t>((u >> (8 * i)) & 0xFF));
  }
  void reserve(size_t n) { out_.reserve(n); }
  std::vector<uint8_t> take() { return std::move(out_); }

 private:
  std::vector<uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> in) : in_(in) {}

  std::span<const uint8_t> bytes(size_t n, const char* what) {
    if (n > in_.size() - pos_) {
      throw FrameError(std::string("truncated frame reading ") + what + ": need " + std::to_string(n) +
                       " bytes at offset " + std::to_string(pos_) + ", have " + std::to_string(in_.size() - pos_));
    }
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  T le(const char* what) {
    auto s = bytes(sizeof(T), what);
    std::make_unsigned_t<T> u = 0;
    for (size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::make_unsigned_t<T>>(s[i]) << (8 * i);
    return static_cast<T>(u);
  }
  size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

constexpr bool kLittleEndian = std::endian::native == std::endian::little;

template <typename T>
void write_values(Writer& w, std::span<const T> values, const Column& c) {
  const size_t n = values.size();
  w.le<uint64_t>(n * sizeof(T));
  if (kLittleEndian && c.null_count() == 0) {
    w.bytes(values.data(), n * sizeof(T));
    return;
  }
  for (size_t i = 0; i < n; ++i) {
    T v = c.is_valid(i) ? values[i] : T{};
    if constexpr (std::is_same_v<T, double>) {
      w.le<uint64_t>(std::bit_cast<uint64_t>(v));
    } else {
      w.le<T>(v);
    }
  }
}

}  // namespace

std::vector<uint8_t> serialize_table(const Table& table) {
  Writer w;
  size_t estimate = 18;
  for (const auto& c : table.columns()) {
    estimate += 32 + c.validity().bytes().size() + c.length() * 8 + c.utf8_data().size();
  }
  w.reserve(estimate);

  w.bytes(kFrameMagic, 4);
  w.le<uint16_t>(kFrameVersion);
  w.le<uint32_t>(static_cast<uint32_t>(table.num_columns()));
  w.le<uint64_t>(table.num_rows());
  const size_t rows = table.num_rows();
  for (size_t ci = 0; ci < table.num_columns(); ++ci) {
    const Column& c = table.column(ci);
    const Field& f = table.schema().field(ci);
    if (f.name.size() > UINT16_MAX) throw InvalidArgument("column name longer than 65535 bytes: " + f.name.substr(0, 32));
    w.le<uint8_t>(static_cast<uint8_t>(c.dtype()));
    w.le<uint16_t>(static_cast<uint16_t>(f.name.size()));
    w.bytes(f.name.data(), f.name.size());
    const auto vb = c.validity().bytes();
    w.le<uint64_t>(vb.size());
    w.bytes(vb.data(), vb.size());
    switch (c.dtype()) {
      case DType::Int64:
        write_values<int64_t>(w, c.int64_values(), c);
        break;
      case DType::Float64:
        write_values<double>(w, c.float64_values(), c);
        break;
      case DType::Bool:
        write_values<uint8_t>(w, c.bool_values(), c);
        break;
      case DType::Utf8: {
        w.le<uint64_t>((rows + 1) * 8);
        uint64_t at = 0;
        w.le<uint64_t>(0);
        for (size_t i = 0; i < rows; ++i) {
          if (c.is_valid(i)) at += c.utf8_at(i).size();
          w.le<uint64_t>(at);
        }
        w.le<uint64_t>(at);
        if (c.null_count() == 0) {
          w.bytes(c.utf8_data().data(), c.utf8_data().size());
        } else {
          for (size_t i = 0; i < rows; ++i) {
            if (c.is_valid(i)) w.bytes(c.utf8_at(i).data(), c.utf8_at(i).size());
          }
        }
        break;
      }
    }
  }
  return w.take();
}

namespace {

uint64_t expect_length(Reader& r, uint64_t expected, const char* what, size_t col) {
  const auto got = r.le<uint64_t>(what);
  if (got != expected) {
    throw FrameError("column " + std::to_string(col) + ": " + what + " declares " + std::to_string(got) +
                     " bytes, expected " + std::to_string(expected));
  }
  return got;
}

}  // namespace

Table deserialize_table(std::span<const uint8_t> frame) {
  Reader r(frame);
  auto magic = r.bytes(4, "magic");
  if (std::memcmp(magic.data(), kFrameMagic, 4) != 0) throw FrameError("bad magic: not a table frame");
  const auto version = r.le<uint16_t>("version");
  if (version != kFrameVersion) throw FrameError("unsupported frame version " + std::to_string(version));
  const auto ncols = r.le<uint32_t>("column count");
  const auto rows64 = r.le<uint64_t>("row count");
  if (ncols == 0) throw FrameError("frame declares zero columns");
  // Every row needs at least one byte per column, so a larger count cannot be valid.
  if (rows64 > r.remaining()) throw FrameError("row count " + std::to_string(rows64) + " exceeds frame size");
  const auto rows = static_cast<size_t>(rows64);

  std::vector<Field> fields;
  std::vector<Column> cols;
  for (uint32_t ci = 0; ci < ncols; ++ci) {
    const auto tag = r.le<uint8_t>("dtype");
    if (tag > 3) throw FrameError("column " + std::to_string(ci) + ": unknown dtype tag " + std::to_string(tag));
    const auto dtype = static_cast<DType>(tag);
    const auto name_len = r.le<uint16_t>("name length");
    auto name = r.bytes(name_len, "name");
    fields.push_back({std::string(name.begin(), name.end()), dtype});

    const uint64_t vbytes = (rows + 7) / 8;
    expect_length(r, vbytes, "validity", ci);
    auto vb = r.bytes(vbytes, "validity bitmap");
    Bitmap validity(std::vector<uint8_t>(vb.begin(), vb.end()), rows);

    switch (dtype) {
      case DType::Int64: {
        expect_length(r, rows * 8ULL, "int64 values", ci);
        std::vector<int64_t> v(rows);
        for (size_t i = 0; i < rows; ++i) v[i] = r.le<int64_t>("int64 value");
        cols.push_back(Column::from_int64(std::move(v), std::move(validity)));
        break;
      }
      case DType::Float64: {
        expect_length(r, rows * 8ULL, "float64 values", ci);
        std::vector<double> v(rows);
        for (size_t i = 0; i < rows; ++i) v[i] = std::bit_cast<double>(r.le<uint64_t>("float64 value"));
        cols.push_back(Column::from_float64(std::move(v), std::move(validity)));
        break;
      }
      case DType::Bool: {
        expect_length(r, rows, "bool values", ci);
        auto b = r.bytes(rows, "bool values");
        std::vector<uint8_t> v(b.begin(), b.end());
        for (auto x : v) {
          if (x > 1) throw FrameError("column " + std::to_string(ci) + ": bool byte " + std::to_string(x));
        }
        cols.push_back(Column::from_bool(std::move(v), std::move(validity)));
        break;
      }
      case DType::Utf8: {
        expect_length(r, (rows + 1) * 8ULL, "utf8 offsets", ci);
        std::vector<uint64_t> offsets(rows + 1);
        for (size_t i = 0; i <= rows; ++i) {
          offsets[i] = r.le<uint64_t>("utf8 offset");
          if (i == 0 && offsets[0] != 0) throw FrameError("column " + std::to_string(ci) + ": offsets[0] != 0");
          if (i > 0 && offsets[i] < offsets[i - 1]) {
            throw FrameError("column " + std::to_string(ci) + ": offsets not monotone at " + std::to_string(i));
          }
        }
        const auto data_len = r.le<uint64_t>("utf8 data length");
        if (data_len != offsets.back()) {
          throw FrameError("column " + std::to_string(ci) + ": data length " + std::to_string(data_len) +
                           " != last offset " + std::to_string(offsets.back()));
        }
        if (data_len > r.remaining()) throw FrameError("truncated frame reading utf8 data");
        auto d = r.bytes(data_len, "utf8 data");
        cols.push_back(Column::from_utf8(std::move(offsets), std::string(d.begin(), d.end()), std::move(validity)));
        break;
      }
    }
  }
  if (r.remaining() != 0) throw FrameError(std::to_string(r.remaining()) + " bytes of trailing garbage after frame");
  return Table(Schema(std::move(fields)), std::move(cols));
}

}  // namespace tessera::comm
