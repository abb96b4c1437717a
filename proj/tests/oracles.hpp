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

// Straight-line reference implementations shared by the unit tests and the
// acceptance runner. Nothing here calls the library code it checks.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <vector>

#include "sritm/colorimetry.hpp"
#include "sritm/frame_io.hpp"
#include "sritm/metrics.hpp"
#include "sritm/tensor.hpp"

namespace sritm::oracle {

using M3 = std::array<std::array<double, 3>, 3>;

inline M3 inverse(const M3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  M3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int a = (j + 1) % 3, b = (j + 2) % 3, c = (i + 1) % 3, d = (i + 2) % 3;
      r[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
    }
  return r;
}

inline M3 mul3(const M3& a, const M3& b) {
  M3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

// Normalized primary matrix from xy chromaticities and the D65 white point.
inline M3 npm(double rx, double ry, double gx, double gy, double bx, double by) {
  const double wx = 0.3127, wy = 0.3290;
  const M3 p{{{rx / ry, gx / gy, bx / by}, {1.0, 1.0, 1.0},
              {(1 - rx - ry) / ry, (1 - gx - gy) / gy, (1 - bx - by) / by}}};
  const std::array<double, 3> w{wx / wy, 1.0, (1 - wx - wy) / wy};
  const M3 pi = inverse(p);
  std::array<double, 3> s{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) s[i] += pi[i][k] * w[k];
  M3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = p[i][j] * s[j];
  return r;
}

inline const M3 kNpm709 = npm(0.64, 0.33, 0.30, 0.60, 0.15, 0.06);
inline const M3 kNpm2020 = npm(0.708, 0.292, 0.170, 0.797, 0.131, 0.046);

inline double pq_reference(double nits) {
  const double m1 = 2610.0 / 16384, m2 = 2523.0 / 4096 * 128, c1 = 3424.0 / 4096, c2 = 2413.0 / 4096 * 32,
               c3 = 2392.0 / 4096 * 32;
  const double y = std::pow(nits / 10000.0, m1);
  return std::pow((c1 + c2 * y) / (1 + c3 * y), m2);
}

// Window statistics recomputed from scratch at every pixel.
inline Tensor<double> windowed_guided_filter(const Tensor<double>& p, const Tensor<double>& g, int r, double eps) {
  const Shape& s = p.shape();
  const auto h = s.h(), w = s.w();
  Tensor<double> out(s);
  for (std::int64_t n = 0; n < s.n(); ++n)
    for (std::int64_t c = 0; c < s.c(); ++c) {
      Tensor<double> a(Shape{h, w}), b(Shape{h, w});
      for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t x = 0; x < w; ++x) {
          double k = 0, mp = 0, mg = 0, mgg = 0, mgp = 0;
          for (auto yy = std::max<std::int64_t>(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
            for (auto xx = std::max<std::int64_t>(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
              const double pv = p.at(n, c, yy, xx), gv = g.at(n, c, yy, xx);
              k += 1;
              mp += pv;
              mg += gv;
              mgg += gv * gv;
              mgp += gv * pv;
            }
          mp /= k;
          mg /= k;
          const double av = (mgp / k - mg * mp) / (mgg / k - mg * mg + eps);
          a.data()[static_cast<std::size_t>(y * w + x)] = av;
          b.data()[static_cast<std::size_t>(y * w + x)] = mp - av * mg;
        }
      for (std::int64_t y = 0; y < h; ++y)
        for (std::int64_t x = 0; x < w; ++x) {
          double k = 0, ma = 0, mb = 0;
          for (auto yy = std::max<std::int64_t>(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
            for (auto xx = std::max<std::int64_t>(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
              k += 1;
              ma += a.data()[static_cast<std::size_t>(yy * w + xx)];
              mb += b.data()[static_cast<std::size_t>(yy * w + xx)];
            }
          out.at(n, c, y, x) = ma / k * g.at(n, c, y, x) + mb / k;
        }
    }
  return out;
}

// Weighted statistics of every 11x11 window, evaluated directly.
inline SsimTerms naive_ssim_terms(const Plane& a, const Plane& b) {
  double g[11], gs = 0;
  for (int i = 0; i < 11; ++i) gs += g[i] = std::exp(-(i - 5.0) * (i - 5.0) / (2 * 1.5 * 1.5));
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double s = 0, cs = 0;
  int count = 0;
  for (std::int64_t y0 = 0; y0 + 11 <= a.height; ++y0)
    for (std::int64_t x0 = 0; x0 + 11 <= a.width; ++x0) {
      double ma = 0, mb = 0, aa = 0, bb = 0, ab = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          const double w = g[i] * g[j] / (gs * gs);
          const double va = a.at(y0 + i, x0 + j), vb = b.at(y0 + i, x0 + j);
          ma += w * va;
          mb += w * vb;
          aa += w * va * va;
          bb += w * vb * vb;
          ab += w * va * vb;
        }
      const double l = (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
      const double c = (2 * (ab - ma * mb) + c2) / ((aa - ma * ma) + (bb - mb * mb) + c2);
      s += l * c;
      cs += c;
      ++count;
    }
  return {s / count, cs / count};
}

inline Plane halve(const Plane& p) {
  Plane out(p.width / 2, p.height / 2);
  for (std::int64_t y = 0; y < out.height; ++y)
    for (std::int64_t x = 0; x < out.width; ++x)
      out.at(y, x) = (p.at(2 * y, 2 * x) + p.at(2 * y, 2 * x + 1) + p.at(2 * y + 1, 2 * x) + p.at(2 * y + 1, 2 * x + 1)) / 4;
  return out;
}

inline double ms_ssim_oracle(Plane a, Plane b, int scales, SsimTerms (*terms)(const Plane&, const Plane&)) {
  const double w[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  double used = 0;
  for (int s = 0; s < scales; ++s) used += w[s];
  const double rescale = (w[0] + w[1] + w[2] + w[3] + w[4]) / used;
  double v = 1;
  for (int s = 0; s < scales; ++s) {
    const SsimTerms t = terms(a, b);
    v *= std::pow(std::max(s == scales - 1 ? t.ssim : t.cs, 0.0), w[s] * rescale);
    a = halve(a);
    b = halve(b);
  }
  return v;
}

// Materializes the seven exposed, gamma-encoded, 10-bit images and averages
// their PSNRs in dB.
inline double mpsnr_oracle(const LuminanceFrame& a, const LuminanceFrame& b) {
  double total = 0;
  for (int c = -3; c <= 3; ++c) {
    std::vector<double> ea, eb;
    for (int ch = 0; ch < 3; ++ch)
      for (std::size_t i = 0; i < a.pixel_count(); ++i) {
        const double va = std::clamp(std::pow(std::pow(2.0, c) * a.rgb[ch][i], 1 / 2.2), 0.0, 1.0);
        const double vb = std::clamp(std::pow(std::pow(2.0, c) * b.rgb[ch][i], 1 / 2.2), 0.0, 1.0);
        ea.push_back(std::round(va * 1023) / 1023);
        eb.push_back(std::round(vb * 1023) / 1023);
      }
    double mse = 0;
    for (std::size_t i = 0; i < ea.size(); ++i) mse += (ea[i] - eb[i]) * (ea[i] - eb[i]);
    mse /= static_cast<double>(ea.size());
    total += 10 * std::log10(1 / mse);
  }
  return total / 7;
}

}  // namespace sritm::oracle
