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

#include "sritm/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sritm/runtime.hpp"

namespace sritm {
namespace {

template <typename T>
using RowMajor = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMajor<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMajor<T>>;

void require_same_shape(const char* op, const Shape& a, const Shape& b) {
  if (!(a == b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.str() + " vs " + b.str());
  }
}

// Unfolds one image (C, H, W) into columns (C·k·k, H·W) with zero padding.
template <typename T>
void im2col(const T* img, std::int64_t channels, std::int64_t height, std::int64_t width,
            int k, T* col) {
  const int pad = k / 2;
  const std::int64_t hw = height * width;
  for (std::int64_t c = 0; c < channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = col + ((c * k + ky) * k + kx) * hw;
        const int dy = ky - pad;
        const int dx = kx - pad;
        for (std::int64_t y = 0; y < height; ++y) {
          const std::int64_t sy = y + dy;
          T* out = row + y * width;
          if (sy < 0 || sy >= height) {
            std::fill(out, out + width, T{0});
            continue;
          }
          const T* src = img + (c * height + sy) * width;
          const std::int64_t x0 = std::max<std::int64_t>(0, -dx);
          const std::int64_t x1 = std::min<std::int64_t>(width, width - dx);
          std::fill(out, out + x0, T{0});
          std::copy(src + x0 + dx, src + x1 + dx, out + x0);
          std::fill(out + x1, out + width, T{0});
        }
      }
    }
  }
}

// Adjoint of im2col: scatters columns back into an image gradient.
template <typename T>
void col2im_add(const T* col, std::int64_t channels, std::int64_t height, std::int64_t width,
                int k, T* img) {
  const int pad = k / 2;
  const std::int64_t hw = height * width;
  for (std::int64_t c = 0; c < channels; ++c) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row = col + ((c * k + ky) * k + kx) * hw;
        const int dy = ky - pad;
        const int dx = kx - pad;
        for (std::int64_t y = 0; y < height; ++y) {
          const std::int64_t sy = y + dy;
          if (sy < 0 || sy >= height) continue;
          T* dst = img + (c * height + sy) * width;
          const T* in = row + y * width;
          const std::int64_t x0 = std::max<std::int64_t>(0, -dx);
          const std::int64_t x1 = std::min<std::int64_t>(width, width - dx);
          for (std::int64_t x = x0; x < x1; ++x) dst[x + dx] += in[x];
        }
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- conv2d

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const ConvParams<T>& p) {
  const Shape& xs = x.shape();
  const Shape& ws = p.weight.shape();
  if (ws.rank() != 4 || ws[2] != ws[3] || ws[2] % 2 == 0) {
    throw ShapeError("conv2d: weight must be (C_out, C_in, k, k) with odd k, got " + ws.str());
  }
  if (xs.rank() != 4 || xs.c() != ws[1]) {
    throw ShapeError("conv2d: input " + xs.str() + " does not match weight " + ws.str());
  }
  if (p.bias.shape() != Shape{ws[0]}) {
    throw ShapeError("conv2d: bias " + p.bias.shape().str() + " does not match weight " +
                     ws.str());
  }
  const std::int64_t n = xs.n(), cin = xs.c(), h = xs.h(), w = xs.w();
  const std::int64_t cout = ws[0];
  const int k = static_cast<int>(ws[2]);
  const std::int64_t hw = h * w;
  const std::int64_t kk = cin * k * k;

  std::vector<T> out(static_cast<std::size_t>(n * cout * hw));
  std::vector<T> col(k == 1 ? 0 : static_cast<std::size_t>(kk * hw));
  ConstMapMat<T> wm(p.weight.data().data(), cout, kk);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(p.bias.data().data(), cout);
  for (std::int64_t b = 0; b < n; ++b) {
    const T* img = x.data().data() + b * cin * hw;
    const T* colp = img;
    if (k != 1) {
      im2col(img, cin, h, w, k, col.data());
      colp = col.data();
    }
    MapMat<T> om(out.data() + b * cout * hw, cout, hw);
    om.noalias() = wm * ConstMapMat<T>(colp, kk, hw);
    om.colwise() += bias;
  }

  Tensor<T> xin = x, weight = p.weight, biast = p.bias;
  return detail::make_result<T>(
      "conv2d", Shape{n, cout, h, w}, std::move(out), {&x, &p.weight, &p.bias},
      [xin, weight, biast, n, cin, cout, h, w, k, hw, kk](std::span<const T> g) {
        auto gx = xin.impl()->grad_sink();
        auto gw = weight.impl()->grad_sink();
        auto gb = biast.impl()->grad_sink();
        std::vector<T> col;
        std::vector<T> dcol;
        ConstMapMat<T> wm(weight.data().data(), cout, kk);
        for (std::int64_t b = 0; b < n; ++b) {
          ConstMapMat<T> gm(g.data() + b * cout * hw, cout, hw);
          if (!gb.empty()) {
            Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> gbv(gb.data(), cout);
            gbv += gm.rowwise().sum();
          }
          const T* img = xin.data().data() + b * cin * hw;
          if (!gw.empty()) {
            const T* colp = img;
            if (k != 1) {
              col.resize(static_cast<std::size_t>(kk * hw));
              im2col(img, cin, h, w, k, col.data());
              colp = col.data();
            }
            MapMat<T> gwm(gw.data(), cout, kk);
            gwm.noalias() += gm * ConstMapMat<T>(colp, kk, hw).transpose();
          }
          if (!gx.empty()) {
            if (k == 1) {
              MapMat<T> gxm(gx.data() + b * cin * hw, cin, hw);
              gxm.noalias() += wm.transpose() * gm;
            } else {
              dcol.resize(static_cast<std::size_t>(kk * hw));
              MapMat<T> dm(dcol.data(), kk, hw);
              dm.noalias() = wm.transpose() * gm;
              col2im_add(dcol.data(), cin, h, w, k, gx.data() + b * cin * hw);
            }
          }
        }
      });
}

// ---------------------------------------------------------------- relu

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  auto in = x.data();
  std::vector<T> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > T{0} ? in[i] : T{0};
  if (relu_probe_active()) {
    for (std::size_t i = 0; i < in.size(); ++i) relu_probe_mix(in[i] > T{0} ? i + 1 : 0);
  }
  Tensor<T> xin = x;
  return detail::make_result<T>("relu", x.shape(), std::move(out), {&x},
                                [xin](std::span<const T> g) {
                                  auto gx = xin.impl()->grad_sink();
                                  auto v = xin.data();
                                  for (std::size_t i = 0; i < g.size(); ++i) {
                                    if (v[i] > T{0}) gx[i] += g[i];
                                  }
                                });
}

// ---------------------------------------------------------------- eltwise

template <typename T>
Tensor<T> eltwise(EltwiseKind kind, const Tensor<T>& a, const Tensor<T>& b, DivOptions div) {
  require_same_shape("eltwise", a.shape(), b.shape());
  auto av = a.data();
  auto bv = b.data();
  std::vector<T> out(av.size());
  const T floor = static_cast<T>(div.floor);
  switch (kind) {
    case EltwiseKind::kAdd:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
      break;
    case EltwiseKind::kMul:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
      break;
    case EltwiseKind::kDiv:
      for (std::size_t i = 0; i < out.size(); ++i) {
        T d = bv[i];
        if (std::abs(d) < floor) {
          if (div.strictness == Strictness::kStrict) {
            throw NumericError("div: divisor magnitude " + std::to_string(d) +
                               " below floor at index " + std::to_string(i));
          }
          d = d < T{0} ? -floor : floor;
        }
        out[i] = av[i] / d;
      }
      break;
  }
  Tensor<T> at = a, bt = b;
  const char* name = kind == EltwiseKind::kAdd ? "add" : kind == EltwiseKind::kMul ? "mul" : "div";
  return detail::make_result<T>(
      name, a.shape(), std::move(out), {&a, &b}, [at, bt, kind, floor](std::span<const T> g) {
        auto ga = at.impl()->grad_sink();
        auto gb = bt.impl()->grad_sink();
        auto av = at.data();
        auto bv = bt.data();
        switch (kind) {
          case EltwiseKind::kAdd:
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i];
            break;
          case EltwiseKind::kMul:
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bv[i];
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * av[i];
            break;
          case EltwiseKind::kDiv:
            for (std::size_t i = 0; i < g.size(); ++i) {
              const bool clamped = std::abs(bv[i]) < floor;
              const T d = clamped ? (bv[i] < T{0} ? -floor : floor) : bv[i];
              if (!ga.empty()) ga[i] += g[i] / d;
              // The clamped divisor is locally constant.
              if (!gb.empty() && !clamped) gb[i] -= g[i] * av[i] / (d * d);
            }
            break;
        }
      });
}

// ---------------------------------------------------------------- channels

template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no operands");
  const Shape& s0 = parts[0].shape();
  if (s0.rank() != 4) throw ShapeError("concat_channels: expected NCHW, got " + s0.str());
  std::int64_t channels = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.rank() != 4 || s.n() != s0.n() || s.h() != s0.h() || s.w() != s0.w()) {
      throw ShapeError("concat_channels: spatial mismatch " + s0.str() + " vs " + s.str());
    }
    channels += s.c();
  }
  const std::int64_t n = s0.n(), hw = s0.h() * s0.w();
  std::vector<T> out(static_cast<std::size_t>(n * channels * hw));
  std::vector<std::int64_t> offsets;
  std::int64_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const std::int64_t c = p.shape().c();
    for (std::int64_t b = 0; b < n; ++b) {
      const T* src = p.data().data() + b * c * hw;
      std::copy(src, src + c * hw, out.data() + (b * channels + offset) * hw);
    }
    offset += c;
  }
  std::vector<const Tensor<T>*> operands;
  for (const auto& p : parts) operands.push_back(&p);
  std::vector<Tensor<T>> held(parts.begin(), parts.end());
  return detail::make_result<T>(
      "concat", Shape{n, channels, s0.h(), s0.w()}, std::move(out), operands,
      [held, offsets, n, channels, hw](std::span<const T> g) {
        for (std::size_t i = 0; i < held.size(); ++i) {
          auto gp = held[i].impl()->grad_sink();
          if (gp.empty()) continue;
          const std::int64_t c = held[i].shape().c();
          for (std::int64_t b = 0; b < n; ++b) {
            const T* src = g.data() + (b * channels + offsets[i]) * hw;
            T* dst = gp.data() + b * c * hw;
            for (std::int64_t j = 0; j < c * hw; ++j) dst[j] += src[j];
          }
        }
      });
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, std::int64_t begin, std::int64_t count) {
  const Shape& s = x.shape();
  if (s.rank() != 4 || begin < 0 || count < 0 || begin + count > s.c()) {
    throw ShapeError("slice_channels: [" + std::to_string(begin) + ", +" +
                     std::to_string(count) + ") out of range for " + s.str());
  }
  const std::int64_t n = s.n(), c = s.c(), hw = s.h() * s.w();
  std::vector<T> out(static_cast<std::size_t>(n * count * hw));
  for (std::int64_t b = 0; b < n; ++b) {
    const T* src = x.data().data() + (b * c + begin) * hw;
    std::copy(src, src + count * hw, out.data() + b * count * hw);
  }
  Tensor<T> xin = x;
  return detail::make_result<T>("slice", Shape{n, count, s.h(), s.w()}, std::move(out), {&x},
                                [xin, n, c, begin, count, hw](std::span<const T> g) {
                                  auto gx = xin.impl()->grad_sink();
                                  for (std::int64_t b = 0; b < n; ++b) {
                                    T* dst = gx.data() + (b * c + begin) * hw;
                                    const T* src = g.data() + b * count * hw;
                                    for (std::int64_t j = 0; j < count * hw; ++j) dst[j] += src[j];
                                  }
                                });
}

// ---------------------------------------------------------------- pixel shuffle

namespace {

// Index map of pixel_shuffle: for each output element, its source index.
std::vector<std::int64_t> shuffle_index(const Shape& in, int r) {
  const std::int64_t n = in.n(), cin = in.c(), h = in.h(), w = in.w();
  const std::int64_t c = cin / (r * r), oh = h * r, ow = w * r;
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n * c * oh * ow));
  std::size_t o = 0;
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t ch = 0; ch < c; ++ch)
      for (std::int64_t y = 0; y < oh; ++y)
        for (std::int64_t x = 0; x < ow; ++x) {
          const std::int64_t src_c = ch * r * r + (y % r) * r + (x % r);
          idx[o++] = ((b * cin + src_c) * h + y / r) * w + x / r;
        }
  return idx;
}

template <typename T>
Tensor<T> gather(const char* op, const Tensor<T>& x, const Shape& out_shape,
                 std::vector<std::int64_t> idx) {
  auto in = x.data();
  std::vector<T> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = in[static_cast<std::size_t>(idx[i])];
  Tensor<T> xin = x;
  return detail::make_result<T>(op, out_shape, std::move(out), {&x},
                                [xin, idx = std::move(idx)](std::span<const T> g) {
                                  auto gx = xin.impl()->grad_sink();
                                  for (std::size_t i = 0; i < idx.size(); ++i) {
                                    gx[static_cast<std::size_t>(idx[i])] += g[i];
                                  }
                                });
}

}  // namespace

template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, int r) {
  const Shape& s = x.shape();
  if (r < 1 || s.rank() != 4 || s.c() % (r * r) != 0) {
    throw ShapeError("pixel_shuffle: channels of " + s.str() + " not divisible by r^2 = " +
                     std::to_string(r * r));
  }
  return gather("pixel_shuffle", x, Shape{s.n(), s.c() / (r * r), s.h() * r, s.w() * r},
                shuffle_index(s, r));
}

template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& x, int r) {
  const Shape& s = x.shape();
  if (r < 1 || s.rank() != 4 || s.h() % r != 0 || s.w() % r != 0) {
    throw ShapeError("pixel_unshuffle: spatial size of " + s.str() + " not divisible by " +
                     std::to_string(r));
  }
  const Shape in{s.n(), s.c() * r * r, s.h() / r, s.w() / r};
  auto fwd = shuffle_index(in, r);
  std::vector<std::int64_t> inv(fwd.size());
  for (std::size_t i = 0; i < fwd.size(); ++i) inv[static_cast<std::size_t>(fwd[i])] =
      static_cast<std::int64_t>(i);
  return gather("pixel_unshuffle", x, in, std::move(inv));
}

// ---------------------------------------------------------------- reductions

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc{0};
  for (const T v : x.data()) acc += v;
  Tensor<T> xin = x;
  return detail::make_result<T>("sum", Shape{}, std::vector<T>{acc}, {&x},
                                [xin](std::span<const T> g) {
                                  auto gx = xin.impl()->grad_sink();
                                  for (auto& v : gx) v += g[0];
                                });
}

template <typename T>
Tensor<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  require_same_shape("mse_loss", pred.shape(), target.shape());
  auto p = pred.data();
  auto t = target.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
    acc += d * d;
  }
  const double count = static_cast<double>(p.size());
  Tensor<T> pt = pred, tt = target;
  return detail::make_result<T>(
      "mse_loss", Shape{}, std::vector<T>{static_cast<T>(acc / count)}, {&pred},
      [pt, tt, count](std::span<const T> g) {
        auto gp = pt.impl()->grad_sink();
        auto p = pt.data();
        auto t = tt.data();
        const T scale = static_cast<T>(2.0 / count) * g[0];
        for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += scale * (p[i] - t[i]);
      });
}

#define SRITM_INSTANTIATE_OPS(T)                                                        \
  template Tensor<T> conv2d<T>(const Tensor<T>&, const ConvParams<T>&);                \
  template Tensor<T> relu<T>(const Tensor<T>&);                                         \
  template Tensor<T> eltwise<T>(EltwiseKind, const Tensor<T>&, const Tensor<T>&,        \
                                DivOptions);                                            \
  template Tensor<T> concat_channels<T>(std::span<const Tensor<T>>);                    \
  template Tensor<T> slice_channels<T>(const Tensor<T>&, std::int64_t, std::int64_t);  \
  template Tensor<T> pixel_shuffle<T>(const Tensor<T>&, int);                           \
  template Tensor<T> pixel_unshuffle<T>(const Tensor<T>&, int);                         \
  template Tensor<T> sum<T>(const Tensor<T>&);                                          \
  template Tensor<T> mse_loss<T>(const Tensor<T>&, const Tensor<T>&);

SRITM_INSTANTIATE_OPS(float)
SRITM_INSTANTIATE_OPS(double)

#undef SRITM_INSTANTIATE_OPS

}  // namespace sritm
