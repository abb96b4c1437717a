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

#include "sritm/tensor_file.hpp"

#include <bit>
#include <istream>
#include <ostream>

#include "sritm/error.hpp"

namespace sritm {

void ByteWriter::bytes(std::string_view b) { os_.write(b.data(), static_cast<std::streamsize>(b.size())); }

void ByteWriter::u8(std::uint8_t v) { os_.put(static_cast<char>(v)); }

void ByteWriter::u16(std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os_.write(b, 2);
}

void ByteWriter::u32(std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os_.write(b, 4);
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::f32s(std::span<const float> v) {
  for (const float f : v) f32(f);
}

void ByteReader::fail(const std::string& what) const { throw FormatError(path_, offset_, what); }

void ByteReader::read(char* dst, std::size_t n) {
  is_.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is_.gcount()) != n) {
    fail("unexpected end of file (wanted " + std::to_string(n) + " bytes)");
  }
  offset_ += n;
}

std::string ByteReader::bytes(std::size_t n) {
  std::string s(n, '\0');
  read(s.data(), n);
  return s;
}

std::uint8_t ByteReader::u8() {
  char c;
  read(&c, 1);
  return static_cast<std::uint8_t>(c);
}

std::uint16_t ByteReader::u16() {
  unsigned char b[2];
  read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t ByteReader::u32() {
  unsigned char b[4];
  read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

void ByteReader::f32s(std::span<float> out) {
  std::string raw = bytes(out.size() * 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto* b = reinterpret_cast<const unsigned char*>(raw.data() + 4 * i);
    const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                            (static_cast<std::uint32_t>(b[1]) << 8) |
                            (static_cast<std::uint32_t>(b[2]) << 16) |
                            (static_cast<std::uint32_t>(b[3]) << 24);
    out[i] = std::bit_cast<float>(u);
  }
}

bool ByteReader::at_end() { return is_.peek() == std::istream::traits_type::eof(); }

void write_tensor_section(ByteWriter& w, std::span<const TensorRecord> records) {
  w.bytes(kWeightMagic);
  w.u32(static_cast<std::uint32_t>(records.size()));
  for (const auto& rec : records) {
    if (rec.name.size() > 0xffff) throw Error("tensor name too long: " + rec.name);
    w.u16(static_cast<std::uint16_t>(rec.name.size()));
    w.bytes(rec.name);
    w.u8(static_cast<std::uint8_t>(rec.dims.size()));
    std::uint64_t count = 1;
    for (const auto d : rec.dims) {
      w.u32(d);
      count *= d;
    }
    if (count != rec.values.size()) {
      throw ShapeError("tensor '" + rec.name + "' has " + std::to_string(rec.values.size()) +
                       " values for " + std::to_string(count) + " elements");
    }
    w.f32s(rec.values);
  }
}

std::vector<TensorRecord> read_tensor_section(ByteReader& r) {
  const std::uint64_t start = r.offset();
  if (r.bytes(kWeightMagic.size()) != kWeightMagic) {
    throw FormatError(r.path(), start, "bad magic (expected SRITM\\x01)");
  }
  const std::uint32_t count = r.u32();
  std::vector<TensorRecord> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord rec;
    rec.name = r.bytes(r.u16());
    const std::uint8_t rank = r.u8();
    if (rank > 4) r.fail("tensor '" + rec.name + "' has unsupported rank " + std::to_string(rank));
    std::uint64_t n = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      rec.dims.push_back(r.u32());
      n *= rec.dims.back();
    }
    if (n > (std::uint64_t{1} << 32)) r.fail("tensor '" + rec.name + "' is implausibly large");
    rec.values.resize(static_cast<std::size_t>(n));
    r.f32s(rec.values);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace sritm
