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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sritm/ops.hpp"

namespace sritm {

double cubic_kernel(double x) {
  constexpr double a = -0.5;
  const double ax = std::abs(x);
  if (ax <= 1.0) return ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0;
  if (ax < 2.0) return ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a;
  return 0.0;
}

namespace {

struct Tap {
  std::int64_t index;
  double weight;
};

// Normalized taps for every output sample along one axis.
std::vector<std::vector<Tap>> axis_taps(std::int64_t in, std::int64_t out, double scale,
                                        bool antialias) {
  const bool widen = antialias && scale < 1.0;
  const double stretch = widen ? scale : 1.0;
  const double support = 2.0 / stretch;
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out));
  for (std::int64_t i = 0; i < out; ++i) {
    const double center = (static_cast<double>(i) + 0.5) / scale - 0.5;
    const auto first = static_cast<std::int64_t>(std::floor(center - support));
    const auto last = static_cast<std::int64_t>(std::ceil(center + support));
    auto& row = taps[static_cast<std::size_t>(i)];
    double total = 0.0;
    for (std::int64_t j = first; j <= last; ++j) {
      const double w = stretch * cubic_kernel(stretch * (center - static_cast<double>(j)));
      if (w == 0.0) continue;
      const std::int64_t src = std::clamp<std::int64_t>(j, 0, in - 1);
      auto it = std::find_if(row.begin(), row.end(), [&](const Tap& t) { return t.index == src; });
      if (it == row.end()) {
        row.push_back({src, w});
      } else {
        it->weight += w;
      }
      total += w;
    }
    for (auto& t : row) t.weight /= total;
  }
  return taps;
}

std::int64_t scaled_extent(std::int64_t extent, Scale s, const char* axis) {
  if (s.num <= 0 || s.den <= 0) throw ShapeError("resize_bicubic: scale must be positive");
  if ((extent * s.num) % s.den != 0) {
    throw ShapeError(std::string("resize_bicubic: ") + axis + " " + std::to_string(extent) +
                     " * " + std::to_string(s.num) + "/" + std::to_string(s.den) +
                     " is not an integer");
  }
  return extent * s.num / s.den;
}

}  // namespace

template <typename T>
Tensor<T> resize_bicubic(const Tensor<T>& x, Scale scale, bool antialias) {
  const Shape& s = x.shape();
  if (s.rank() != 4) throw ShapeError("resize_bicubic: expected NCHW, got " + s.str());
  const std::int64_t planes = s.n() * s.c();
  const std::int64_t ih = s.h(), iw = s.w();
  const std::int64_t oh = scaled_extent(ih, scale, "height");
  const std::int64_t ow = scaled_extent(iw, scale, "width");
  const double f = scale.value();
  auto htaps = axis_taps(ih, oh, f, antialias);
  auto wtaps = axis_taps(iw, ow, f, antialias);

  // Horizontal pass into (planes, ih, ow), then vertical into (planes, oh, ow).
  std::vector<double> mid(static_cast<std::size_t>(planes * ih * ow));
  auto in = x.data();
  for (std::int64_t p = 0; p < planes; ++p)
    for (std::int64_t y = 0; y < ih; ++y) {
      const T* row = in.data() + (p * ih + y) * iw;
      double* dst = mid.data() + (p * ih + y) * ow;
      for (std::int64_t j = 0; j < ow; ++j) {
        double acc = 0.0;
        for (const Tap& t : wtaps[static_cast<std::size_t>(j)]) acc += t.weight * row[t.index];
        dst[j] = acc;
      }
    }
  std::vector<T> out(static_cast<std::size_t>(planes * oh * ow));
  for (std::int64_t p = 0; p < planes; ++p)
    for (std::int64_t i = 0; i < oh; ++i) {
      T* dst = out.data() + (p * oh + i) * ow;
      for (std::int64_t j = 0; j < ow; ++j) {
        double acc = 0.0;
        for (const Tap& t : htaps[static_cast<std::size_t>(i)]) {
          acc += t.weight * mid[static_cast<std::size_t>((p * ih + t.index) * ow + j)];
        }
        dst[j] = static_cast<T>(acc);
      }
    }

  Tensor<T> xin = x;
  return detail::make_result<T>(
      "resize_bicubic", Shape{s.n(), s.c(), oh, ow}, std::move(out), {&x},
      [xin, htaps = std::move(htaps), wtaps = std::move(wtaps), planes, ih, iw, oh,
       ow](std::span<const T> g) {
        auto gx = xin.impl()->grad_sink();
        std::vector<double> gmid(static_cast<std::size_t>(planes * ih * ow), 0.0);
        for (std::int64_t p = 0; p < planes; ++p)
          for (std::int64_t i = 0; i < oh; ++i)
            for (std::int64_t j = 0; j < ow; ++j) {
              const double gv = g[static_cast<std::size_t>((p * oh + i) * ow + j)];
              for (const Tap& t : htaps[static_cast<std::size_t>(i)]) {
                gmid[static_cast<std::size_t>((p * ih + t.index) * ow + j)] += t.weight * gv;
              }
            }
        for (std::int64_t p = 0; p < planes; ++p)
          for (std::int64_t y = 0; y < ih; ++y) {
            const double* src = gmid.data() + (p * ih + y) * ow;
            T* dst = gx.data() + (p * ih + y) * iw;
            for (std::int64_t j = 0; j < ow; ++j) {
              for (const Tap& t : wtaps[static_cast<std::size_t>(j)]) {
                dst[t.index] += static_cast<T>(t.weight * src[j]);
              }
            }
          }
      });
}

template Tensor<float> resize_bicubic<float>(const Tensor<float>&, Scale, bool);
template Tensor<double> resize_bicubic<double>(const Tensor<double>&, Scale, bool);

}  // namespace sritm
