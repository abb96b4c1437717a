// Copyright 2026 The sritm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sritm {

/// Little-endian binary writer.
class ByteWriter {
 public:
  explicit ByteWriter(std::ostream& os) : os_(os) {}

  void bytes(std::string_view b);
  void u8(std::uint8_t v);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void f32(float v);
  void f32s(std::span<const float> v);

 private:
  std::ostream& os_;
};

/// Little-endian binary reader that tracks its byte offset and throws
/// FormatError (with that offset) on truncation.
class ByteReader {
 public:
  ByteReader(std::istream& is, std::string path) : is_(is), path_(std::move(path)) {}

  std::string bytes(std::size_t n);
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  float f32();
  void f32s(std::span<float> out);

  std::uint64_t offset() const noexcept { return offset_; }
  const std::string& path() const noexcept { return path_; }
  bool at_end();

  [[noreturn]] void fail(const std::string& what) const;

 private:
  void read(char* dst, std::size_t n);

  std::istream& is_;
  std::string path_;
  std::uint64_t offset_ = 0;
};

/// One named tensor of the weight-file encoding.
struct TensorRecord {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

/// "SRITM\x01"
inline constexpr std::string_view kWeightMagic{"SRITM\x01", 6};

/// Section layout: magic, u32 count, then per tensor u16 name length, UTF-8
/// name, u8 rank, rank x u32 dims, raw f32 values.
void write_tensor_section(ByteWriter& w, std::span<const TensorRecord> records);
std::vector<TensorRecord> read_tensor_section(ByteReader& r);

}  // namespace sritm
