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

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sritm/colorimetry.hpp"
#include "sritm/error.hpp"
#include "sritm/tensor.hpp"

namespace sritm {

/// Returned by PSNR when the two signals are identical.
inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

/// One single-channel image.
struct Plane {
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(std::int64_t w, std::int64_t h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w * h), fill) {}
  double at(std::int64_t y, std::int64_t x) const {
    return values[static_cast<std::size_t>(y * width + x)];
  }
  double& at(std::int64_t y, std::int64_t x) { return values[static_cast<std::size_t>(y * width + x)]; }
};

Plane plane_of(const ImageFrame& frame, int channel);
template <typename T>
Plane plane_of(const Tensor<T>& t, std::int64_t n, std::int64_t c);

/// 10 log10(peak^2 / MSE); kPsnrInfinity when MSE is zero.
double psnr(std::span<const double> a, std::span<const double> b, double peak = 1.0);
double psnr(const ImageFrame& a, const ImageFrame& b, double peak = 1.0);
template <typename T>
double psnr(const Tensor<T>& a, const Tensor<T>& b, double peak = 1.0);

/// Exposure stops used by mpsnr.
inline constexpr std::array<int, 7> kMpsnrExposures = {-3, -2, -1, 0, 1, 2, 3};
inline constexpr int kMpsnrBits = 10;
inline constexpr double kMpsnrGamma = 2.2;

/// Exposed, gamma-encoded and 10-bit quantized rendering of one value.
double mpsnr_render(double v, int stop, bool quantize_output = true);

/// Mean over exposure stops of the PSNR between renderings of the two
/// linear frames. Negative input is clamped (permissive) or rejected.
double mpsnr(const LuminanceFrame& a, const LuminanceFrame& b,
             Strictness strictness = Strictness::kPermissive, bool quantize_output = true);

struct SsimConstants {
  static constexpr int kWindow = 11;
  static constexpr double kSigma = 1.5;
  static constexpr double kK1 = 0.01;
  static constexpr double kK2 = 0.03;
  static constexpr double kRange = 1.0;
};

/// Normalized 11x11 Gaussian window (sigma 1.5), row-major.
std::array<double, 121> ssim_window();

struct SsimTerms {
  double ssim = 0.0;  // mean of l * cs over valid windows
  double cs = 0.0;    // mean of cs over valid windows
};

/// Means of the SSIM and contrast-structure maps over every fully contained
/// window position. Throws ShapeError for planes smaller than the window.
SsimTerms ssim_terms(const Plane& a, const Plane& b);
double ssim(const Plane& a, const Plane& b);

inline constexpr std::array<double, 5> kMsSsimWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

struct MsSsimResult {
  double value = 0.0;
  int scales = 0;
};

/// 2x2 block mean, stride 2 (odd trailing rows/columns dropped).
Plane downsample2(const Plane& p);

/// Five-scale MS-SSIM. Planes too small for five scales throw ShapeError in
/// strict mode; permissive mode uses as many scales as fit and rescales the
/// exponents to the original total.
MsSsimResult ms_ssim(const Plane& a, const Plane& b, Strictness strictness = Strictness::kStrict);

/// Mean and population standard deviation. Infinite entries make the mean
/// infinite; the deviation is 0 when every entry is the same infinity and
/// infinite otherwise.
struct Aggregate {
  double mean = 0.0;
  double std = 0.0;
};
Aggregate aggregate(std::span<const double> values);

struct MetricReport {
  std::vector<std::string> pairs;
  /// metric -> per-pair values, aligned with `pairs`.
  std::map<std::string, std::vector<double>> values;
  std::map<std::string, std::string> notes;

  Aggregate summary(const std::string& metric) const;
  /// Key=value file: `<metric>.pair.<name>=`, `<metric>.mean=`, `<metric>.std=`.
  void write_key_values(std::ostream& os) const;
  /// Human-readable mean +/- std table.
  void write_table(std::ostream& os) const;
};

struct EvalConfig {
  std::set<std::string> metrics = {"psnr", "mpsnr", "ssim", "msssim"};
  double peak_nits = kDefaultPeakNits;
  Strictness strictness = Strictness::kPermissive;
};

/// Parses a comma-separated metric list; unknown names throw ConfigError.
std::set<std::string> parse_metric_list(const std::string& list);

/// Pairs frames by filename. PSNR/SSIM/MS-SSIM run on code values, mPSNR on
/// linearized light normalized to `peak_nits`.
MetricReport evaluate_pairs(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                            const EvalConfig& config = {});

}  // namespace sritm
