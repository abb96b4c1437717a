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

#include "sritm/ops.hpp"
#include "sritm/tensor.hpp"

namespace sritm {

struct DecompositionParams {
  int radius = 5;
  /// Regularization on [0, 1]-normalized intensities.
  double eps = 0.01;
  double div_floor = kDivFloor;

  /// Throws ConfigError for radius < 1, eps <= 0 or div_floor <= 0.
  void validate() const;
};

/// Guided filter applied independently to every (n, c) plane of `input`
/// with the matching plane of `guide` as the guide. Window statistics use
/// integral images over (2r+1)^2 boxes truncated at the border (means over
/// the valid intersection). The result does not record gradients.
template <typename T>
Tensor<T> guided_filter(const Tensor<T>& input, const Tensor<T>& guide,
                        const DecompositionParams& params);

template <typename T>
Tensor<T> guided_filter(const Tensor<T>& input, const DecompositionParams& params) {
  return guided_filter(input, input, params);
}

template <typename T>
struct Decomposition {
  Tensor<T> base;
  Tensor<T> detail;
};

/// base = guided_filter(image, image); detail = image / max(base, div_floor).
template <typename T>
Decomposition<T> decompose(const Tensor<T>& image, const DecompositionParams& params);

template <typename T>
struct StackedInputs {
  Tensor<T> base_in;    // [I, I_b]
  Tensor<T> detail_in;  // [I, I_d]
};

template <typename T>
StackedInputs<T> make_inputs(const Tensor<T>& image, const Tensor<T>& base,
                             const Tensor<T>& detail);

}  // namespace sritm
