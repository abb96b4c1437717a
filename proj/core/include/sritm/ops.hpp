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
#include <span>

#include "sritm/error.hpp"
#include "sritm/tensor.hpp"

namespace sritm {

/// Minimum divisor magnitude for elementwise division.
inline constexpr double kDivFloor = 1e-6;

/// Convolution layer parameters. Weight is (C_out, C_in, k, k), bias is
/// (C_out). Stride 1 with zero "same" padding; k must be odd.
template <typename T>
struct ConvParams {
  Tensor<T> weight;
  Tensor<T> bias;

  std::int64_t out_channels() const { return weight.shape()[0]; }
  std::int64_t in_channels() const { return weight.shape()[1]; }
  std::int64_t kernel() const { return weight.shape()[2]; }
};

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const ConvParams<T>& p);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

enum class EltwiseKind { kAdd, kMul, kDiv };

struct DivOptions {
  double floor = kDivFloor;
  Strictness strictness = Strictness::kPermissive;
};

/// Elementwise binary op on identically shaped tensors. Division clamps the
/// divisor magnitude to `div.floor` (sign preserved) or throws in strict mode.
template <typename T>
Tensor<T> eltwise(EltwiseKind kind, const Tensor<T>& a, const Tensor<T>& b,
                  DivOptions div = {});

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return eltwise(EltwiseKind::kAdd, a, b);
}
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return eltwise(EltwiseKind::kMul, a, b);
}
template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b, DivOptions opts = {}) {
  return eltwise(EltwiseKind::kDiv, a, b, opts);
}

/// Channel concatenation; the first operand occupies the leading channels.
template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>> parts);

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  const Tensor<T> parts[] = {a, b};
  return concat_channels<T>(std::span<const Tensor<T>>(parts));
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, std::int64_t begin, std::int64_t count);

/// (N, C·r², H, W) -> (N, C, H·r, W·r) with
/// out[n, c, h·r + a, w·r + b] = in[n, c·r² + a·r + b, h, w].
template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, int r);

/// Inverse rearrangement of pixel_shuffle.
template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& x, int r);

/// Sum of all elements as a rank-0 tensor.
template <typename T>
Tensor<T> sum(const Tensor<T>& x);

/// Mean squared error over all elements as a rank-0 tensor.
template <typename T>
Tensor<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target);

/// Positive rational resize factor.
struct Scale {
  std::int64_t num = 1;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Separable bicubic resize (Keys kernel, a = -0.5) with pixel-center
/// alignment and border clamping. With `antialias` and a downscale, the
/// kernel is stretched by 1/scale.
template <typename T>
Tensor<T> resize_bicubic(const Tensor<T>& x, Scale scale, bool antialias = true);

/// Keys cubic convolution kernel with a = -0.5.
double cubic_kernel(double x);

}  // namespace sritm
