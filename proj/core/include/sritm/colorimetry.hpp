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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sritm/error.hpp"
#include "sritm/tensor.hpp"

namespace sritm {

enum class Primaries { kBT709, kBT2020 };
enum class Transfer { kGamma24, kPQ, kHLG, kLinear };
/// How the three planes of a frame are encoded: Y'CbCr with BT.709 or
/// BT.2020 non-constant-luminance coefficients, or plain R'G'B'.
enum class ColorMatrix { kBT709, kBT2020NCL, kIdentity };
enum class Range { kFull };

inline constexpr double kPqMaxNits = 10000.0;
inline constexpr double kDefaultPeakNits = 1000.0;
/// Luminance assigned to SDR code value 1.0 when linearizing.
inline constexpr double kSdrWhiteNits = 100.0;

struct ColorimetrySpec {
  Primaries primaries = Primaries::kBT709;
  Transfer transfer = Transfer::kGamma24;
  ColorMatrix matrix = ColorMatrix::kBT709;
  int bit_depth = 8;
  Range range = Range::kFull;

  /// BT.709 / gamma 2.4 / BT.709 Y'CbCr / 8 bit.
  static ColorimetrySpec sdr() { return {}; }
  /// BT.2020 / PQ / BT.2020 NCL Y'CbCr / 10 bit.
  static ColorimetrySpec hdr() {
    return {Primaries::kBT2020, Transfer::kPQ, ColorMatrix::kBT2020NCL, 10, Range::kFull};
  }

  std::string str() const;
  friend bool operator==(const ColorimetrySpec&, const ColorimetrySpec&) = default;
};

std::string_view to_string(Primaries p);
std::string_view to_string(Transfer t);
std::string_view to_string(ColorMatrix m);
std::string_view to_string(Range r);
// Parsers throw ConfigError naming `key` on unknown values.
Primaries parse_primaries(std::string_view s, const std::string& key = "primaries");
Transfer parse_transfer(std::string_view s, const std::string& key = "transfer");
ColorMatrix parse_matrix(std::string_view s, const std::string& key = "matrix");
Range parse_range(std::string_view s, const std::string& key = "range");
int parse_bit_depth(std::string_view s, const std::string& key = "bit_depth");

/// Three planes of normalized code values in [0, 1].
struct ImageFrame {
  int width = 0;
  int height = 0;
  std::array<std::vector<double>, 3> planes;
  ColorimetrySpec spec;

  ImageFrame() = default;
  ImageFrame(int w, int h, ColorimetrySpec s);

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  /// Throws ShapeError when a plane's size disagrees with width x height.
  void validate() const;
};

/// Linear-light RGB normalized so that 1.0 equals `peak_nits` cd/m^2.
struct LuminanceFrame {
  int width = 0;
  int height = 0;
  std::array<std::vector<double>, 3> rgb;
  Primaries primaries = Primaries::kBT709;
  double peak_nits = kDefaultPeakNits;

  LuminanceFrame() = default;
  LuminanceFrame(int w, int h, Primaries p, double peak = kDefaultPeakNits);
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
};

// ------------------------------------------------------------ transfer

enum class Direction { kEncode, kDecode };

/// SMPTE ST 2084 with Y = absolute luminance / 10000.
double pq_encode(double y);
double pq_decode(double v);
double gamma24_encode(double l);
double gamma24_decode(double v);
/// BT.2100 HLG OETF on normalized scene light in [0, 1] and its inverse.
double hlg_encode(double e);
double hlg_decode(double v);

/// Transfer on one value. Linear values are normalized to `peak_nits`
/// (only PQ uses it to reach the absolute domain). Encode inputs must be
/// nonnegative; decode inputs must lie in [0, 1]. Out-of-domain inputs are
/// clamped (permissive) or rejected with NumericError (strict).
double apply_transfer(double value, Transfer kind, Direction dir,
                      double peak_nits = kDefaultPeakNits,
                      Strictness strictness = Strictness::kPermissive);
void apply_transfer(std::span<double> values, Transfer kind, Direction dir,
                    double peak_nits = kDefaultPeakNits,
                    Strictness strictness = Strictness::kPermissive);

// ------------------------------------------------------------ gamut

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// RGB -> CIE XYZ derived from the primaries' chromaticities and D65.
Matrix3 rgb_to_xyz(Primaries p);
/// Linear RGB(from) -> linear RGB(to).
Matrix3 gamut_matrix(Primaries from, Primaries to);
Matrix3 multiply(const Matrix3& a, const Matrix3& b);

/// Converts in place. from == to leaves the values untouched.
void gamut_convert(std::array<std::vector<double>, 3>& rgb, Primaries from, Primaries to);
void gamut_convert(LuminanceFrame& frame, Primaries to);

// ------------------------------------------------------------ Y'CbCr

struct LumaCoefficients {
  double kr;
  double kb;
  double kg() const { return 1.0 - kr - kb; }
};
LumaCoefficients luma_coefficients(ColorMatrix m);

/// Full-range R'G'B' <-> Y'CbCr with chroma offset 0.5. kIdentity is a
/// no-op. Out-of-range results are clamped in permissive mode.
void ycbcr_from_rgb(std::array<std::vector<double>, 3>& planes, ColorMatrix m);
void rgb_from_ycbcr(std::array<std::vector<double>, 3>& planes, ColorMatrix m,
                    Strictness strictness = Strictness::kPermissive);

// ------------------------------------------------------------ quantization

/// round(v * (2^bits - 1)), half away from zero, clamped to the code range.
std::uint32_t quantize(double v, int bits);
double dequantize(std::uint32_t code, int bits);
/// dequantize(quantize(v)).
double snap(double v, int bits);
void snap(std::span<double> values, int bits);

// ------------------------------------------------------------ pipelines

struct ConversionStats {
  std::size_t negative_clamped = 0;
  std::size_t overrange_clamped = 0;
};

/// Decodes any frame to linear light normalized to `peak_nits`. Gamma-coded
/// content maps code value 1.0 to `white_nits`.
LuminanceFrame linearize(const ImageFrame& frame, double peak_nits = kDefaultPeakNits,
                         double white_nits = kSdrWhiteNits);

/// SDR display-format frame -> linear light. Requires the SDR spec. When
/// `target` differs from BT.709 the result is gamut-converted.
LuminanceFrame sdr_to_linear(const ImageFrame& frame, double peak_nits = kDefaultPeakNits,
                             double white_nits = kSdrWhiteNits,
                             Primaries target = Primaries::kBT709);

/// Linear light -> display-format frame with `spec`: gamut conversion,
/// clamping of negative (out-of-gamut) and over-range components, transfer
/// encode, Y'CbCr matrix, and quantization to spec.bit_depth.
ImageFrame encode_frame(const LuminanceFrame& lum, const ColorimetrySpec& spec,
                        double white_nits = kSdrWhiteNits, ConversionStats* stats = nullptr);

/// Linear light -> HDR display format (BT.2020 / PQ / 10 bit).
ImageFrame hdr_encode(const LuminanceFrame& lum, ConversionStats* stats = nullptr);

// ------------------------------------------------------------ tensors

/// Frame planes as a (1, 3, H, W) tensor.
template <typename T>
Tensor<T> frame_to_tensor(const ImageFrame& frame);

/// Batch item `index` of an (N, 3, H, W) tensor as a frame. Values are
/// clamped to [0, 1] and snapped to spec.bit_depth.
template <typename T>
ImageFrame tensor_to_frame(const Tensor<T>& t, const ColorimetrySpec& spec, std::int64_t index = 0);

}  // namespace sritm
