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

#include "sritm/decomposition.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace sritm {

void DecompositionParams::validate() const {
  if (radius < 1) throw ConfigError("radius", "must be >= 1, got " + std::to_string(radius));
  if (!(eps > 0.0)) throw ConfigError("eps", "must be > 0");
  if (!(div_floor > 0.0)) throw ConfigError("div_floor", "must be > 0");
}

namespace {

// Summed-area table with a zero border row and column.
class BoxSum {
 public:
  BoxSum(const std::vector<double>& v, std::int64_t h, std::int64_t w)
      : w1_(w + 1), table_(static_cast<std::size_t>((h + 1) * (w + 1)), 0.0) {
    for (std::int64_t y = 0; y < h; ++y) {
      double row = 0.0;
      for (std::int64_t x = 0; x < w; ++x) {
        row += v[static_cast<std::size_t>(y * w + x)];
        at(y + 1, x + 1) = at(y, x + 1) + row;
      }
    }
  }

  // Sum over rows [y0, y1) and columns [x0, x1).
  double sum(std::int64_t y0, std::int64_t x0, std::int64_t y1, std::int64_t x1) const {
    return at(y1, x1) - at(y0, x1) - at(y1, x0) + at(y0, x0);
  }

 private:
  double& at(std::int64_t y, std::int64_t x) { return table_[static_cast<std::size_t>(y * w1_ + x)]; }
  double at(std::int64_t y, std::int64_t x) const {
    return table_[static_cast<std::size_t>(y * w1_ + x)];
  }

  std::int64_t w1_;
  std::vector<double> table_;
};

// Truncated-window mean of a plane.
std::vector<double> box_mean(const std::vector<double>& v, std::int64_t h, std::int64_t w, int r) {
  BoxSum s(v, h, w);
  std::vector<double> out(v.size());
  for (std::int64_t y = 0; y < h; ++y) {
    const std::int64_t y0 = std::max<std::int64_t>(0, y - r), y1 = std::min(h, y + r + 1);
    for (std::int64_t x = 0; x < w; ++x) {
      const std::int64_t x0 = std::max<std::int64_t>(0, x - r), x1 = std::min(w, x + r + 1);
      const double count = static_cast<double>((y1 - y0) * (x1 - x0));
      out[static_cast<std::size_t>(y * w + x)] = s.sum(y0, x0, y1, x1) / count;
    }
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> guided_filter(const Tensor<T>& input, const Tensor<T>& guide,
                        const DecompositionParams& params) {
  params.validate();
  const Shape& s = input.shape();
  if (s.rank() != 4 || !(s == guide.shape())) {
    throw ShapeError("guided_filter: input " + s.str() + " vs guide " + guide.shape().str());
  }
  const std::int64_t h = s.h(), w = s.w(), hw = h * w;
  const std::int64_t planes = s.n() * s.c();
  const int r = params.radius;
  Tensor<T> out(s);
  std::vector<double> p(static_cast<std::size_t>(hw)), g(p.size()), gg(p.size()), gp(p.size());
  for (std::int64_t k = 0; k < planes; ++k) {
    const T* pin = input.data().data() + k * hw;
    const T* gin = guide.data().data() + k * hw;
    // Statistics are taken around the first pixel. The filter commutes with
    // the shift, cancellation in var/cov shrinks, and a constant plane comes
    // back unchanged to the last bit.
    const double p0 = static_cast<double>(pin[0]), g0 = static_cast<double>(gin[0]);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = static_cast<double>(pin[i]) - p0;
      g[i] = static_cast<double>(gin[i]) - g0;
      gg[i] = g[i] * g[i];
      gp[i] = g[i] * p[i];
    }
    const auto mean_p = box_mean(p, h, w, r);
    const auto mean_g = box_mean(g, h, w, r);
    const auto corr_gg = box_mean(gg, h, w, r);
    const auto corr_gp = box_mean(gp, h, w, r);
    std::vector<double> a(p.size()), b(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double var = corr_gg[i] - mean_g[i] * mean_g[i];
      const double cov = corr_gp[i] - mean_g[i] * mean_p[i];
      a[i] = cov / (var + params.eps);
      b[i] = mean_p[i] - a[i] * mean_g[i];
    }
    const auto mean_a = box_mean(a, h, w, r);
    const auto mean_b = box_mean(b, h, w, r);
    T* dst = out.data().data() + k * hw;
    for (std::size_t i = 0; i < p.size(); ++i) dst[i] = static_cast<T>(mean_a[i] * g[i] + mean_b[i] + p0);
  }
  return out;
}

template <typename T>
Decomposition<T> decompose(const Tensor<T>& image, const DecompositionParams& params) {
  Decomposition<T> d;
  d.base = guided_filter(image, params);
  d.detail = div(image, d.base, DivOptions{params.div_floor, Strictness::kPermissive});
  return d;
}

template <typename T>
StackedInputs<T> make_inputs(const Tensor<T>& image, const Tensor<T>& base, const Tensor<T>& detail) {
  for (const Tensor<T>* t : {&image, &base, &detail}) {
    const Shape& s = t->shape();
    if (s.rank() != 4 || s.c() != 3 || !(s == image.shape())) {
      throw ShapeError("make_inputs: expected three (N, 3, H, W) tensors of equal shape, got " +
                       image.shape().str() + ", " + base.shape().str() + ", " +
                       detail.shape().str());
    }
  }
  return {concat_channels(image, base), concat_channels(image, detail)};
}

#define SRITM_INSTANTIATE_DECOMP(T)                                                           \
  template Tensor<T> guided_filter<T>(const Tensor<T>&, const Tensor<T>&,                     \
                                      const DecompositionParams&);                            \
  template Decomposition<T> decompose<T>(const Tensor<T>&, const DecompositionParams&);       \
  template StackedInputs<T> make_inputs<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);

SRITM_INSTANTIATE_DECOMP(float)
SRITM_INSTANTIATE_DECOMP(double)

#undef SRITM_INSTANTIATE_DECOMP

}  // namespace sritm
