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

#include "sritm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include "sritm/error.hpp"
#include "sritm/frame_io.hpp"
#include "sritm/keyvalue.hpp"
#include "sritm/ops.hpp"
#include "sritm/tensor_file.hpp"

namespace sritm {

namespace {

constexpr std::string_view kShardMagic{"SRDS\x01", 5};

}  // namespace

void DatasetSpec::validate() const {
  if (sf != 2 && sf != 4) throw ConfigError("sf", "must be 2 or 4");
  if (patch_size < sf || patch_size % sf != 0) {
    throw ConfigError("patch_size", "must be a positive multiple of sf");
  }
  if (patches_min < 1 || patches_max < patches_min) throw ConfigError("patches_min", "empty patch-count range");
  if (stride_min < 1 || stride_max < stride_min) throw ConfigError("stride_min", "empty frame-stride range");
}

bool DatasetSpec::set(const std::string& key, const std::string& value) {
  auto as_int = [&] { return static_cast<int>(parse_int_value(key, value)); };
  if (key == "patch_size") patch_size = as_int();
  else if (key == "patches_min") patches_min = as_int();
  else if (key == "patches_max") patches_max = as_int();
  else if (key == "stride_min") stride_min = as_int();
  else if (key == "stride_max") stride_max = as_int();
  else if (key == "dataset_seed") seed = static_cast<std::uint64_t>(parse_int_value(key, value));
  else return false;
  return true;
}

std::vector<std::size_t> sample_frames(std::size_t frame_count, const DatasetSpec& spec) {
  spec.validate();
  if (frame_count == 0) throw ConfigError("frames", "empty frame list");
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> step(spec.stride_min, spec.stride_max);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < frame_count; i += static_cast<std::size_t>(step(rng))) out.push_back(i);
  return out;
}

std::vector<PairSample> extract_pairs(const ImageFrame& hdr, const ImageFrame& sdr, std::uint32_t frame_id,
                                      const DatasetSpec& spec) {
  spec.validate();
  if (hdr.width != sdr.width || hdr.height != sdr.height) {
    throw ShapeError("frame " + std::to_string(frame_id) + ": HDR is " + std::to_string(hdr.width) + "x" +
                     std::to_string(hdr.height) + " but SDR is " + std::to_string(sdr.width) + "x" +
                     std::to_string(sdr.height));
  }
  const int p = spec.patch_size;
  if (hdr.width < p || hdr.height < p) {
    throw ShapeError("frame " + std::to_string(frame_id) + " is smaller than the " + std::to_string(p) +
                     "-pixel patch");
  }
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    frame_id};
  std::mt19937_64 rng(seq);
  const int count = std::uniform_int_distribution<int>(spec.patches_min, spec.patches_max)(rng);
  std::uniform_int_distribution<int> oy(0, (hdr.height - p) / spec.sf), ox(0, (hdr.width - p) / spec.sf);

  std::vector<PairSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const int y0 = oy(rng) * spec.sf;
    const int x0 = ox(rng) * spec.sf;
    PairSample s;
    s.frame_id = frame_id;
    s.crop_y = static_cast<std::uint32_t>(y0);
    s.crop_x = static_cast<std::uint32_t>(x0);
    s.hr = Tensor<float>(Shape{1, 3, p, p});
    Tensor<double> sdr_crop(Shape{1, 3, p, p});
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < p; ++y) {
        for (int x = 0; x < p; ++x) {
          const std::size_t src = static_cast<std::size_t>(y0 + y) * static_cast<std::size_t>(hdr.width) +
                                  static_cast<std::size_t>(x0 + x);
          s.hr.at(0, c, y, x) = static_cast<float>(hdr.planes[c][src]);
          sdr_crop.at(0, c, y, x) = sdr.planes[c][src];
        }
      }
    }
    const Tensor<double> small = resize_bicubic(sdr_crop, Scale{1, spec.sf}, true);
    s.lr = Tensor<float>(small.shape());
    auto dst = s.lr.data();
    auto src = small.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = static_cast<float>(snap(std::clamp(src[i], 0.0, 1.0), sdr.spec.bit_depth));
    }
    out.push_back(std::move(s));
  }
  return out;
}

double synth_tone_curve(double s) {
  if (s <= kSynthKnee) return s;
  const double room = 1.0 - kSynthKnee;
  return kSynthKnee + room * (1.0 - std::exp(-(s - kSynthKnee) / room));
}

ScenePair synth_scene(std::uint64_t seed, int width, int height) {
  if (width < 1 || height < 1) throw ShapeError("synth_scene: empty size");
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const double w = width, h = height;

  LuminanceFrame lum(width, height, Primaries::kBT709, kDefaultPeakNits);
  std::array<double, 3> bg{};
  for (double& c : bg) c = uni(0.01, 0.06);
  const double gx = uni(0.0, 1.0), gy = uni(0.0, 1.0);

  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves(3);
  for (auto& wv : waves) {
    const double f = uni(0.01, 0.08), angle = uni(0.0, std::numbers::pi);
    wv = {f * std::cos(angle), f * std::sin(angle), uni(0.0, 2.0 * std::numbers::pi), uni(0.05, 0.15)};
  }

  struct Shape2 {
    bool disc;
    double cx, cy, rx, ry, soft;
    std::array<double, 3> color;
  };
  std::vector<Shape2> shapes(static_cast<std::size_t>(std::uniform_int_distribution<int>(6, 12)(rng)));
  for (auto& s : shapes) {
    s.disc = uni(0.0, 1.0) < 0.5;
    s.cx = uni(0.0, w);
    s.cy = uni(0.0, h);
    s.rx = uni(0.05, 0.3) * w;
    s.ry = uni(0.05, 0.3) * h;
    s.soft = uni(1.0, 4.0);
    const double level = std::exp(uni(std::log(0.02), std::log(1.0)));
    for (double& c : s.color) c = level * uni(0.3, 1.0);
  }

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      std::array<double, 3> v{};
      const double ramp = 0.5 + gx * x / w + gy * y / h;
      for (int c = 0; c < 3; ++c) v[c] = bg[c] * ramp;
      for (const auto& s : shapes) {
        // Signed distance-like measure, negative inside.
        double d;
        if (s.disc) {
          const double nx = (x - s.cx) / s.rx, ny = (y - s.cy) / s.ry;
          d = (std::sqrt(nx * nx + ny * ny) - 1.0) * std::min(s.rx, s.ry);
        } else {
          d = std::max(std::abs(x - s.cx) - s.rx, std::abs(y - s.cy) - s.ry);
        }
        const double t = std::clamp(0.5 - d / (2.0 * s.soft), 0.0, 1.0);
        const double alpha = t * t * (3.0 - 2.0 * t);
        for (int c = 0; c < 3; ++c) v[c] = v[c] * (1.0 - alpha) + alpha * s.color[c];
      }
      double tex = 1.0;
      for (const auto& wv : waves) tex += wv.amp * std::sin(2.0 * std::numbers::pi * (wv.fx * x + wv.fy * y) + wv.phase);
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
      for (int c = 0; c < 3; ++c) lum.rgb[c][i] = std::clamp(v[c] * tex, 0.0, 1.0);
    }
  }

  ScenePair out;
  out.hdr = hdr_encode(lum);
  LuminanceFrame toned = lum;
  const double gain = kDefaultPeakNits / kSdrWhiteNits;
  for (auto& plane : toned.rgb) {
    for (double& v : plane) v = synth_tone_curve(v * gain) / gain;
  }
  out.sdr = encode_frame(toned, ColorimetrySpec::sdr(), kSdrWhiteNits);
  return out;
}

// ------------------------------------------------------------ shards

namespace {

void write_tensor(ByteWriter& w, const Tensor<float>& t) {
  const Shape& s = t.shape();
  w.u32(static_cast<std::uint32_t>(s.c()));
  w.u32(static_cast<std::uint32_t>(s.h()));
  w.u32(static_cast<std::uint32_t>(s.w()));
  w.f32s(t.data());
}

Tensor<float> read_tensor(ByteReader& r) {
  const std::uint32_t c = r.u32(), h = r.u32(), w = r.u32();
  const std::uint64_t n = static_cast<std::uint64_t>(c) * h * w;
  if (c == 0 || h == 0 || w == 0 || n > (1ULL << 30)) r.fail("implausible tensor dims");
  Tensor<float> t(Shape{1, static_cast<std::int64_t>(c), static_cast<std::int64_t>(h), static_cast<std::int64_t>(w)});
  r.f32s(t.data());
  return t;
}

}  // namespace

void write_shard(std::span<const PairSample> samples, const std::filesystem::path& path) {
  std::ostringstream buf(std::ios::binary);
  ByteWriter w(buf);
  w.bytes(kShardMagic);
  w.u32(static_cast<std::uint32_t>(samples.size()));
  for (const auto& s : samples) {
    w.u32(s.frame_id);
    w.u32(s.crop_y);
    w.u32(s.crop_x);
    write_tensor(w, s.lr);
    write_tensor(w, s.hr);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  const std::string bytes = buf.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

std::vector<PairSample> read_shard(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  ByteReader r(in, path.string());
  if (r.bytes(kShardMagic.size()) != kShardMagic) throw FormatError(path.string(), 0, "bad shard magic");
  const std::uint32_t count = r.u32();
  std::vector<PairSample> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    try {
      PairSample s;
      s.frame_id = r.u32();
      s.crop_y = r.u32();
      s.crop_x = r.u32();
      s.lr = read_tensor(r);
      s.hr = read_tensor(r);
      out.push_back(std::move(s));
    } catch (const FormatError& e) {
      throw FormatError(path.string(), e.offset(),
                        "sample " + std::to_string(i) + " of " + std::to_string(count) + ": truncated or corrupt");
    }
  }
  if (!r.at_end()) r.fail("trailing bytes after " + std::to_string(count) + " samples");
  return out;
}

std::vector<std::filesystem::path> list_shards(const std::filesystem::path& path) {
  if (std::filesystem::is_regular_file(path)) return {path};
  if (!std::filesystem::is_directory(path)) throw IoError(path.string(), "no such shard file or directory");
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(path)) {
    if (e.is_regular_file() && e.path().extension() == ".srds") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw IoError(path.string(), "no .srds shards found");
  return out;
}

std::vector<PairSample> read_shards(const std::filesystem::path& path) {
  std::vector<PairSample> all;
  for (const auto& p : list_shards(path)) {
    auto part = read_shard(p);
    std::move(part.begin(), part.end(), std::back_inserter(all));
  }
  return all;
}

namespace {

std::filesystem::path shard_name(const std::filesystem::path& dir, std::size_t index) {
  std::ostringstream os;
  os << "shard_" << std::setw(5) << std::setfill('0') << index << ".srds";
  return dir / os.str();
}

}  // namespace

DatasetSummary make_synthetic_dataset(int frames, int frame_size, const DatasetSpec& spec,
                                      const std::filesystem::path& out_dir) {
  spec.validate();
  if (frames < 1) throw ConfigError("synthetic", "need at least one frame");
  if (frame_size < spec.patch_size) throw ConfigError("frame_size", "smaller than patch_size");
  std::filesystem::create_directories(out_dir);
  DatasetSummary summary;
  for (int f = 0; f < frames; ++f) {
    const auto id = static_cast<std::uint32_t>(f);
    const ScenePair scene = synth_scene(spec.seed * 1000003ULL + id, frame_size, frame_size);
    const auto samples = extract_pairs(scene.hdr, scene.sdr, id, spec);
    summary.shards.push_back(shard_name(out_dir, summary.shards.size()));
    write_shard(samples, summary.shards.back());
    ++summary.frames;
    summary.samples += samples.size();
  }
  return summary;
}

DatasetSummary make_frames_dataset(const std::filesystem::path& dir, const DatasetSpec& spec,
                                   const std::filesystem::path& out_dir) {
  spec.validate();
  const auto hdr_dir = dir / "hdr", sdr_dir = dir / "sdr";
  if (!std::filesystem::is_directory(hdr_dir)) throw IoError(hdr_dir.string(), "missing hdr/ directory");
  if (!std::filesystem::is_directory(sdr_dir)) throw IoError(sdr_dir.string(), "missing sdr/ directory");
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(hdr_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ppm") names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw IoError(hdr_dir.string(), "no .ppm frames");
  std::filesystem::create_directories(out_dir);
  DatasetSummary summary;
  for (std::size_t idx : sample_frames(names.size(), spec)) {
    const auto& name = names[idx];
    if (!std::filesystem::exists(sdr_dir / name)) throw IoError((sdr_dir / name).string(), "missing SDR counterpart");
    const ImageFrame hdr = load_frame(hdr_dir / name);
    const ImageFrame sdr = load_frame(sdr_dir / name);
    if (hdr.width != sdr.width || hdr.height != sdr.height) {
      throw ShapeError(name + ": HDR " + std::to_string(hdr.width) + "x" + std::to_string(hdr.height) +
                       " vs SDR " + std::to_string(sdr.width) + "x" + std::to_string(sdr.height));
    }
    const auto samples = extract_pairs(hdr, sdr, static_cast<std::uint32_t>(idx), spec);
    summary.shards.push_back(shard_name(out_dir, summary.shards.size()));
    write_shard(samples, summary.shards.back());
    ++summary.frames;
    summary.samples += samples.size();
  }
  return summary;
}

}  // namespace sritm
