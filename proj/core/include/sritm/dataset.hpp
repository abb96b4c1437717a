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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sritm/colorimetry.hpp"
#include "sritm/tensor.hpp"

namespace sritm {

struct DatasetSpec {
  /// Patch size on the HR grid; LR patches are patch_size / sf.
  int patch_size = 160;
  int patches_min = 20;
  int patches_max = 40;
  int stride_min = 10;
  int stride_max = 80;
  int sf = 2;
  std::uint64_t seed = 0;

  void validate() const;
  bool set(const std::string& key, const std::string& value);
};

/// LR SDR patch (3, p/sf, p/sf) and HR HDR patch (3, p, p) as code values.
struct PairSample {
  Tensor<float> lr;
  Tensor<float> hr;
  std::uint32_t frame_id = 0;
  std::uint32_t crop_y = 0;
  std::uint32_t crop_x = 0;
};

/// Indices visited by a seeded walk 0, 0 + s1, ... with each step drawn
/// uniformly from [stride_min, stride_max].
std::vector<std::size_t> sample_frames(std::size_t frame_count, const DatasetSpec& spec);

/// Random sf-aligned crops of an aligned HDR/SDR frame pair, reproducible
/// per (spec.seed, frame_id). The LR patch is the bicubic (antialiased)
/// downscale of the SDR crop, requantized to the SDR bit depth.
std::vector<PairSample> extract_pairs(const ImageFrame& hdr, const ImageFrame& sdr,
                                      std::uint32_t frame_id, const DatasetSpec& spec);

struct ScenePair {
  ImageFrame hdr;  // BT.2020 / PQ / 10 bit
  ImageFrame sdr;  // BT.709 / gamma 2.4 / 8 bit
};

/// Knee of the synthetic SDR tone curve, relative to diffuse white.
inline constexpr double kSynthKnee = 0.75;
/// SDR tone curve on light relative to diffuse white: identity up to the
/// knee, then an exponential shoulder approaching 1.
double synth_tone_curve(double s);

/// Procedural linear-light scene (gradients, soft shapes, band-limited
/// texture, up to 1000 cd/m^2) rendered to both display formats.
ScenePair synth_scene(std::uint64_t seed, int width, int height);

/// "SRDS\x01", u32 count, then per sample u32 frame_id, crop_y, crop_x and
/// the lr and hr tensors as u32 C, H, W plus raw f32 values.
void write_shard(std::span<const PairSample> samples, const std::filesystem::path& path);
std::vector<PairSample> read_shard(const std::filesystem::path& path);

/// Shard files (*.srds) in a directory, sorted by name; a file path yields
/// itself.
std::vector<std::filesystem::path> list_shards(const std::filesystem::path& path);
std::vector<PairSample> read_shards(const std::filesystem::path& path);

struct DatasetSummary {
  std::size_t frames = 0;
  std::size_t samples = 0;
  std::vector<std::filesystem::path> shards;
};

/// One shard per synthetic frame of `frame_size` x `frame_size` pixels.
DatasetSummary make_synthetic_dataset(int frames, int frame_size, const DatasetSpec& spec,
                                      const std::filesystem::path& out_dir);
/// Frames from `dir/hdr` and `dir/sdr` (matching file names), visited with
/// the frame-stride walk.
DatasetSummary make_frames_dataset(const std::filesystem::path& dir, const DatasetSpec& spec,
                                   const std::filesystem::path& out_dir);

}  // namespace sritm
