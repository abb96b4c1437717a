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

#include "sritm/colorimetry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace sritm {

// ------------------------------------------------------------ names

std::string_view to_string(Primaries p) {
  return p == Primaries::kBT709 ? "bt709" : "bt2020";
}

std::string_view to_string(Transfer t) {
  switch (t) {
    case Transfer::kGamma24: return "gamma24";
    case Transfer::kPQ: return "pq";
    case Transfer::kHLG: return "hlg";
    case Transfer::kLinear: return "linear";
  }
  return "?";
}

std::string_view to_string(ColorMatrix m) {
  switch (m) {
    case ColorMatrix::kBT709: return "bt709";
    case ColorMatrix::kBT2020NCL: return "bt2020ncl";
    case ColorMatrix::kIdentity: return "identity";
  }
  return "?";
}

std::string_view to_string(Range) { return "full"; }

Primaries parse_primaries(std::string_view s, const std::string& key) {
  if (s == "bt709") return Primaries::kBT709;
  if (s == "bt2020") return Primaries::kBT2020;
  throw ConfigError(key, "unknown primaries '" + std::string(s) + "'");
}

Transfer parse_transfer(std::string_view s, const std::string& key) {
  if (s == "gamma24") return Transfer::kGamma24;
  if (s == "pq") return Transfer::kPQ;
  if (s == "hlg") return Transfer::kHLG;
  if (s == "linear") return Transfer::kLinear;
  throw ConfigError(key, "unknown transfer '" + std::string(s) + "'");
}

ColorMatrix parse_matrix(std::string_view s, const std::string& key) {
  if (s == "bt709") return ColorMatrix::kBT709;
  if (s == "bt2020ncl") return ColorMatrix::kBT2020NCL;
  if (s == "identity") return ColorMatrix::kIdentity;
  throw ConfigError(key, "unknown matrix '" + std::string(s) + "'");
}

Range parse_range(std::string_view s, const std::string& key) {
  if (s == "full") return Range::kFull;
  throw ConfigError(key, "unsupported range '" + std::string(s) + "' (only full)");
}

int parse_bit_depth(std::string_view s, const std::string& key) {
  if (s == "8") return 8;
  if (s == "10") return 10;
  if (s == "16") return 16;
  throw ConfigError(key, "bit depth must be 8, 10 or 16, got '" + std::string(s) + "'");
}

std::string ColorimetrySpec::str() const {
  std::ostringstream os;
  os << to_string(primaries) << '/' << to_string(transfer) << '/' << to_string(matrix) << '/'
     << bit_depth << "bit/" << to_string(range);
  return os.str();
}

// ------------------------------------------------------------ frames

ImageFrame::ImageFrame(int w, int h, ColorimetrySpec s) : width(w), height(h), spec(s) {
  for (auto& p : planes) p.assign(pixel_count(), 0.0);
}

void ImageFrame::validate() const {
  for (std::size_t i = 0; i < planes.size(); ++i) {
    if (planes[i].size() != pixel_count()) {
      throw ShapeError("frame plane " + std::to_string(i) + " has " +
                       std::to_string(planes[i].size()) + " samples, expected " +
                       std::to_string(width) + "x" + std::to_string(height));
    }
  }
}

LuminanceFrame::LuminanceFrame(int w, int h, Primaries p, double peak)
    : width(w), height(h), primaries(p), peak_nits(peak) {
  for (auto& c : rgb) c.assign(pixel_count(), 0.0);
}

// ------------------------------------------------------------ transfer

namespace {

constexpr double kPqM1 = 2610.0 / 16384.0;
constexpr double kPqM2 = 2523.0 / 4096.0 * 128.0;
constexpr double kPqC1 = 3424.0 / 4096.0;
constexpr double kPqC2 = 2413.0 / 4096.0 * 32.0;
constexpr double kPqC3 = 2392.0 / 4096.0 * 32.0;

constexpr double kHlgA = 0.17883277;
const double kHlgB = 1.0 - 4.0 * kHlgA;
const double kHlgC = 0.5 - kHlgA * std::log(4.0 * kHlgA);

}  // namespace

double pq_encode(double y) {
  y = std::max(y, 0.0);
  const double p = std::pow(y, kPqM1);
  return std::pow((kPqC1 + kPqC2 * p) / (1.0 + kPqC3 * p), kPqM2);
}

double pq_decode(double v) {
  v = std::max(v, 0.0);
  const double p = std::pow(v, 1.0 / kPqM2);
  const double num = std::max(p - kPqC1, 0.0);
  return std::pow(num / (kPqC2 - kPqC3 * p), 1.0 / kPqM1);
}

double gamma24_encode(double l) { return std::pow(std::max(l, 0.0), 1.0 / 2.4); }
double gamma24_decode(double v) { return std::pow(std::max(v, 0.0), 2.4); }

double hlg_encode(double e) {
  e = std::max(e, 0.0);
  if (e <= 1.0 / 12.0) return std::sqrt(3.0 * e);
  return kHlgA * std::log(12.0 * e - kHlgB) + kHlgC;
}

double hlg_decode(double v) {
  v = std::max(v, 0.0);
  if (v <= 0.5) return v * v / 3.0;
  return (std::exp((v - kHlgC) / kHlgA) + kHlgB) / 12.0;
}

double apply_transfer(double value, Transfer kind, Direction dir, double peak_nits,
                      Strictness strictness) {
  if (dir == Direction::kEncode) {
    if (value < 0.0 || std::isnan(value)) {
      if (strictness == Strictness::kStrict) {
        throw NumericError("negative linear-light input " + std::to_string(value));
      }
      value = 0.0;
    }
    switch (kind) {
      case Transfer::kGamma24: return gamma24_encode(value);
      case Transfer::kPQ: return pq_encode(value * peak_nits / kPqMaxNits);
      case Transfer::kHLG: return hlg_encode(value);
      case Transfer::kLinear: return value;
    }
  } else {
    if (value < 0.0 || value > 1.0 || std::isnan(value)) {
      if (strictness == Strictness::kStrict) {
        throw NumericError("code value " + std::to_string(value) + " outside [0, 1]");
      }
      value = std::isnan(value) ? 0.0 : std::clamp(value, 0.0, 1.0);
    }
    switch (kind) {
      case Transfer::kGamma24: return gamma24_decode(value);
      case Transfer::kPQ: return pq_decode(value) * kPqMaxNits / peak_nits;
      case Transfer::kHLG: return hlg_decode(value);
      case Transfer::kLinear: return value;
    }
  }
  return value;
}

void apply_transfer(std::span<double> values, Transfer kind, Direction dir, double peak_nits,
                    Strictness strictness) {
  for (auto& v : values) v = apply_transfer(v, kind, dir, peak_nits, strictness);
}

// ------------------------------------------------------------ gamut

namespace {

struct Chromaticities {
  double rx, ry, gx, gy, bx, by;
};

constexpr double kD65x = 0.3127;
constexpr double kD65y = 0.3290;

Chromaticities chromaticities(Primaries p) {
  if (p == Primaries::kBT709) return {0.640, 0.330, 0.300, 0.600, 0.150, 0.060};
  return {0.708, 0.292, 0.170, 0.797, 0.131, 0.046};
}

Eigen::Matrix3d to_eigen(const Matrix3& m) {
  Eigen::Matrix3d e;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) e(r, c) = m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return e;
}

Matrix3 from_eigen(const Eigen::Matrix3d& e) {
  Matrix3 m{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = e(r, c);
  return m;
}

}  // namespace

Matrix3 rgb_to_xyz(Primaries p) {
  const auto ch = chromaticities(p);
  const double xs[3] = {ch.rx, ch.gx, ch.bx};
  const double ys[3] = {ch.ry, ch.gy, ch.by};
  Eigen::Matrix3d prim;
  for (int i = 0; i < 3; ++i) {
    prim(0, i) = xs[i] / ys[i];
    prim(1, i) = 1.0;
    prim(2, i) = (1.0 - xs[i] - ys[i]) / ys[i];
  }
  const Eigen::Vector3d white(kD65x / kD65y, 1.0, (1.0 - kD65x - kD65y) / kD65y);
  const Eigen::Vector3d s = prim.fullPivLu().solve(white);
  return from_eigen(prim * s.asDiagonal());
}

Matrix3 gamut_matrix(Primaries from, Primaries to) {
  if (from == to) return {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  const Eigen::Matrix3d src = to_eigen(rgb_to_xyz(from));
  const Eigen::Matrix3d dst = to_eigen(rgb_to_xyz(to));
  return from_eigen(dst.fullPivLu().solve(src));
}

Matrix3 multiply(const Matrix3& a, const Matrix3& b) { return from_eigen(to_eigen(a) * to_eigen(b)); }

void gamut_convert(std::array<std::vector<double>, 3>& rgb, Primaries from, Primaries to) {
  if (from == to) return;
  const Matrix3 m = gamut_matrix(from, to);
  const std::size_t n = rgb[0].size();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rgb[0][i], g = rgb[1][i], b = rgb[2][i];
    for (std::size_t c = 0; c < 3; ++c) rgb[c][i] = m[c][0] * r + m[c][1] * g + m[c][2] * b;
  }
}

void gamut_convert(LuminanceFrame& frame, Primaries to) {
  gamut_convert(frame.rgb, frame.primaries, to);
  frame.primaries = to;
}

// ------------------------------------------------------------ Y'CbCr

LumaCoefficients luma_coefficients(ColorMatrix m) {
  switch (m) {
    case ColorMatrix::kBT709: return {0.2126, 0.0722};
    case ColorMatrix::kBT2020NCL: return {0.2627, 0.0593};
    case ColorMatrix::kIdentity: break;
  }
  throw ConfigError("matrix", "identity has no luma coefficients");
}

void ycbcr_from_rgb(std::array<std::vector<double>, 3>& planes, ColorMatrix m) {
  if (m == ColorMatrix::kIdentity) return;
  const auto k = luma_coefficients(m);
  const std::size_t n = planes[0].size();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = planes[0][i], g = planes[1][i], b = planes[2][i];
    const double y = k.kr * r + k.kg() * g + k.kb * b;
    planes[0][i] = y;
    planes[1][i] = (b - y) / (2.0 * (1.0 - k.kb)) + 0.5;
    planes[2][i] = (r - y) / (2.0 * (1.0 - k.kr)) + 0.5;
  }
}

void rgb_from_ycbcr(std::array<std::vector<double>, 3>& planes, ColorMatrix m,
                    Strictness strictness) {
  if (m == ColorMatrix::kIdentity) return;
  const auto k = luma_coefficients(m);
  const std::size_t n = planes[0].size();
  for (std::size_t i = 0; i < n; ++i) {
    double y = planes[0][i], cb = planes[1][i], cr = planes[2][i];
    if (cb < 0.0 || cb > 1.0 || cr < 0.0 || cr > 1.0) {
      if (strictness == Strictness::kStrict) {
        throw NumericError("chroma outside [0, 1] at pixel " + std::to_string(i));
      }
      cb = std::clamp(cb, 0.0, 1.0);
      cr = std::clamp(cr, 0.0, 1.0);
    }
    const double r = y + 2.0 * (1.0 - k.kr) * (cr - 0.5);
    const double b = y + 2.0 * (1.0 - k.kb) * (cb - 0.5);
    const double g = (y - k.kr * r - k.kb * b) / k.kg();
    planes[0][i] = r;
    planes[1][i] = g;
    planes[2][i] = b;
  }
}

// ------------------------------------------------------------ quantization

std::uint32_t quantize(double v, int bits) {
  const double max_code = std::ldexp(1.0, bits) - 1.0;
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  const double q = std::round(v * max_code);
  return static_cast<std::uint32_t>(std::min(q, max_code));
}

double dequantize(std::uint32_t code, int bits) {
  return static_cast<double>(code) / (std::ldexp(1.0, bits) - 1.0);
}

double snap(double v, int bits) { return dequantize(quantize(v, bits), bits); }

void snap(std::span<double> values, int bits) {
  for (auto& v : values) v = snap(v, bits);
}

// ------------------------------------------------------------ pipelines

LuminanceFrame linearize(const ImageFrame& frame, double peak_nits, double white_nits) {
  frame.validate();
  auto planes = frame.planes;
  rgb_from_ycbcr(planes, frame.spec.matrix);
  LuminanceFrame lum(frame.width, frame.height, frame.spec.primaries, peak_nits);
  const double gamma_scale = white_nits / peak_nits;
  for (std::size_t c = 0; c < 3; ++c) {
    auto& out = lum.rgb[c];
    for (std::size_t i = 0; i < out.size(); ++i) {
      double v = apply_transfer(planes[c][i], frame.spec.transfer, Direction::kDecode, peak_nits);
      if (frame.spec.transfer == Transfer::kGamma24) v *= gamma_scale;
      out[i] = v;
    }
  }
  return lum;
}

LuminanceFrame sdr_to_linear(const ImageFrame& frame, double peak_nits, double white_nits,
                             Primaries target) {
  if (frame.spec.transfer != Transfer::kGamma24) {
    throw ConfigError("transfer", "SDR stage expects gamma24, frame is " + frame.spec.str());
  }
  if (frame.spec.primaries != Primaries::kBT709) {
    throw ConfigError("primaries", "SDR stage expects bt709, frame is " + frame.spec.str());
  }
  LuminanceFrame lum = linearize(frame, peak_nits, white_nits);
  gamut_convert(lum, target);
  return lum;
}

ImageFrame encode_frame(const LuminanceFrame& lum, const ColorimetrySpec& spec, double white_nits,
                        ConversionStats* stats) {
  ConversionStats local;
  auto rgb = lum.rgb;
  gamut_convert(rgb, lum.primaries, spec.primaries);
  // Upper bound of the encodable linear range, in units of peak_nits.
  double ceiling = 1.0;
  if (spec.transfer == Transfer::kGamma24) ceiling = white_nits / lum.peak_nits;
  if (spec.transfer == Transfer::kPQ) ceiling = kPqMaxNits / lum.peak_nits;
  for (auto& plane : rgb) {
    for (auto& v : plane) {
      if (v < 0.0 || std::isnan(v)) {
        ++local.negative_clamped;
        v = 0.0;
      } else if (v > ceiling) {
        ++local.overrange_clamped;
        v = ceiling;
      }
      if (spec.transfer == Transfer::kGamma24) v /= ceiling;
      v = apply_transfer(v, spec.transfer, Direction::kEncode, lum.peak_nits);
    }
  }
  ycbcr_from_rgb(rgb, spec.matrix);
  ImageFrame out(lum.width, lum.height, spec);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < rgb[c].size(); ++i) out.planes[c][i] = snap(rgb[c][i], spec.bit_depth);
  }
  if (stats) {
    stats->negative_clamped += local.negative_clamped;
    stats->overrange_clamped += local.overrange_clamped;
  }
  return out;
}

ImageFrame hdr_encode(const LuminanceFrame& lum, ConversionStats* stats) {
  return encode_frame(lum, ColorimetrySpec::hdr(), kSdrWhiteNits, stats);
}

// ------------------------------------------------------------ tensors

template <typename T>
Tensor<T> frame_to_tensor(const ImageFrame& frame) {
  frame.validate();
  Tensor<T> t(Shape{1, 3, frame.height, frame.width});
  auto d = t.data();
  const std::size_t n = frame.pixel_count();
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < n; ++i) d[c * n + i] = static_cast<T>(frame.planes[c][i]);
  return t;
}

template <typename T>
ImageFrame tensor_to_frame(const Tensor<T>& t, const ColorimetrySpec& spec, std::int64_t index) {
  const Shape& s = t.shape();
  if (s.rank() != 4 || s.c() != 3 || index < 0 || index >= s.n()) {
    throw ShapeError("tensor_to_frame: expected (N, 3, H, W) with item " + std::to_string(index) +
                     ", got " + s.str());
  }
  ImageFrame frame(static_cast<int>(s.w()), static_cast<int>(s.h()), spec);
  const std::size_t n = frame.pixel_count();
  const T* base = t.data().data() + static_cast<std::size_t>(index) * 3 * n;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < n; ++i) {
      frame.planes[c][i] = snap(std::clamp(static_cast<double>(base[c * n + i]), 0.0, 1.0),
                                spec.bit_depth);
    }
  return frame;
}

template Tensor<float> frame_to_tensor<float>(const ImageFrame&);
template Tensor<double> frame_to_tensor<double>(const ImageFrame&);
template ImageFrame tensor_to_frame<float>(const Tensor<float>&, const ColorimetrySpec&, std::int64_t);
template ImageFrame tensor_to_frame<double>(const Tensor<double>&, const ColorimetrySpec&, std::int64_t);

}  // namespace sritm
