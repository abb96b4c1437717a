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
#include <vector>

#include "sritm/tensor.hpp"

namespace sritm {

/// Glorot-uniform initialization for conv weights (C_out, C_in, k, k):
/// U(-b, b) with b = sqrt(6 / (fan_in + fan_out)), fans including the
/// kernel area. Rank-1 (bias) shapes are zero-filled. Deterministic per seed.
template <typename T>
Tensor<T> xavier_init(const Shape& shape, std::uint64_t seed);

/// Glorot bound for a weight shape.
double xavier_bound(const Shape& shape);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  AdamHyper hyper;
  std::int64_t step = 0;
  // First and second moments, one buffer per parameter in call order.
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
};

/// One bias-corrected Adam update. `lrs[i]` is the learning rate for
/// `params[i]`; parameters without a gradient see a zero gradient.
template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const double> lrs, AdamState<T>& state);

}  // namespace sritm
