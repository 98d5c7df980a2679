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
#include <span>
#include <vector>

#include "tessera/error.hpp"
#include "tessera/table.hpp"

namespace tessera::comm {

/// Raised by deserialize_table for any malformed frame. No partial table is
/// ever returned.
class FrameError : public Error {
 public:
  using Error::Error;
};

inline constexpr char kFrameMagic[4] = {'C', 'Y', 'T', 'F'};
inline constexpr uint16_t kFrameVersion = 1;

/// Little-endian TableFrame encoding:
///
///   "CYTF" | version u16 | column count u32 | row count u64
///   per column:
///     dtype u8 | name length u16 | name bytes
///     validity byte length u64 | validity bytes (LSB-first, zero padded)
///     Int64/Float64: values byte length u64 | raw values
///     Bool:          values byte length u64 | one byte per value
///     Utf8:          offsets byte length u64 | (rows + 1) u64 offsets
///                    | data byte length u64 | data bytes
///
/// Values under null slots are written as zero (or empty strings) so that
/// equal tables always produce equal bytes.
std::vector<uint8_t> serialize_table(const Table& table);

Table deserialize_table(std::span<const uint8_t> frame);

}  // namespace tessera::comm
