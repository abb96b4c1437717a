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

#include "sritm/frame_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>

#include "sritm/keyvalue.hpp"

namespace sritm {
namespace {

constexpr double kStoreMax = 65535.0;

int parse_dimension(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError(key, "missing from sidecar");
  try {
    std::size_t used = 0;
    const int v = std::stoi(it->second, &used);
    if (used != it->second.size() || v <= 0) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a positive integer, got '" + it->second + "'");
  }
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError(key, "missing from sidecar");
  return it->second;
}

// Reads the next whitespace-delimited PPM header token, skipping comments.
std::string header_token(std::istream& in, const std::string& path) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw FormatError(path, static_cast<std::uint64_t>(in.tellg()), "truncated PPM header");
  return tok;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& raster) {
  auto p = raster;
  p.replace_extension(".meta");
  return p;
}

void save_frame(const ImageFrame& frame, const std::filesystem::path& path, std::string_view content) {
  frame.validate();
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out << "P6\n" << frame.width << ' ' << frame.height << "\n65535\n";
    const std::size_t n = frame.pixel_count();
    std::string buf(n * 6, '\0');
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = std::clamp(frame.planes[c][i], 0.0, 1.0);
        const auto s = static_cast<std::uint16_t>(std::round(v * kStoreMax));
        buf[i * 6 + c * 2] = static_cast<char>(s >> 8);
        buf[i * 6 + c * 2 + 1] = static_cast<char>(s & 0xff);
      }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError(path.string(), "write failed");
  }
  std::ofstream meta(sidecar_path(path));
  if (!meta) throw IoError(sidecar_path(path).string(), "cannot open for writing");
  meta << "width=" << frame.width << '\n'
       << "height=" << frame.height << '\n'
       << "bit_depth=" << frame.spec.bit_depth << '\n'
       << "primaries=" << to_string(frame.spec.primaries) << '\n'
       << "transfer=" << to_string(frame.spec.transfer) << '\n'
       << "matrix=" << to_string(frame.spec.matrix) << '\n'
       << "range=" << to_string(frame.spec.range) << '\n';
  if (!content.empty() && content != "image") meta << "content=" << content << '\n';
}

ImageFrame load_frame(const std::filesystem::path& path, Strictness strictness, std::string* content) {
  const auto meta_path = sidecar_path(path);
  if (!std::filesystem::exists(meta_path)) throw IoError(meta_path.string(), "sidecar not found");
  const auto kv = to_map(read_key_value_file(meta_path));
  static const char* kKnown[] = {"width",  "height", "bit_depth", "primaries",
                                 "transfer", "matrix", "range",   "content"};
  for (const auto& [key, value] : kv) {
    bool known = false;
    for (const char* k : kKnown) known = known || key == k;
    if (!known && strictness == Strictness::kStrict) {
      throw ConfigError(key, "unknown sidecar key in " + meta_path.string());
    }
  }

  ColorimetrySpec spec;
  spec.bit_depth = parse_bit_depth(require(kv, "bit_depth"));
  spec.primaries = parse_primaries(require(kv, "primaries"));
  spec.transfer = parse_transfer(require(kv, "transfer"));
  spec.matrix = parse_matrix(require(kv, "matrix"));
  spec.range = parse_range(require(kv, "range"));
  const int width = parse_dimension(kv, "width");
  const int height = parse_dimension(kv, "height");
  if (content) {
    const auto it = kv.find("content");
    *content = it == kv.end() ? "image" : it->second;
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open raster");
  const std::string ps = path.string();
  if (header_token(in, ps) != "P6") throw FormatError(ps, 0, "not a binary PPM (P6)");
  const int rw = std::stoi(header_token(in, ps));
  const int rh = std::stoi(header_token(in, ps));
  const int maxval = std::stoi(header_token(in, ps));
  if (rw != width || rh != height) {
    throw ShapeError(ps + ": raster is " + std::to_string(rw) + "x" + std::to_string(rh) +
                     " but sidecar declares " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
  if (maxval <= 0 || maxval > 65535) {
    throw FormatError(ps, static_cast<std::uint64_t>(in.tellg()), "bad maxval " + std::to_string(maxval));
  }
  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  ImageFrame frame(width, height, spec);
  const std::size_t n = frame.pixel_count();
  std::string buf(n * 3 * bytes_per_sample, '\0');
  const auto data_start = static_cast<std::uint64_t>(in.tellg());
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw FormatError(ps, data_start + static_cast<std::uint64_t>(in.gcount()), "truncated raster");
  }
  const double max_code = std::ldexp(1.0, spec.bit_depth) - 1.0;
  const auto* b = reinterpret_cast<const unsigned char*>(buf.data());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t k = (i * 3 + c) * bytes_per_sample;
      const unsigned s = bytes_per_sample == 2 ? (static_cast<unsigned>(b[k]) << 8) | b[k + 1] : b[k];
      const double code = std::round(static_cast<double>(s) / maxval * max_code);
      frame.planes[c][i] = code / max_code;
    }
  }
  return frame;
}

}  // namespace sritm
