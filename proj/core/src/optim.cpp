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

#include "sritm/optim.hpp"

#include <cmath>
#include <random>
#include <string>

#include "sritm/error.hpp"

namespace sritm {

double xavier_bound(const Shape& shape) {
  if (shape.rank() != 4) throw ShapeError("xavier_bound: expected conv weight, got " + shape.str());
  const double area = static_cast<double>(shape[2] * shape[3]);
  const double fan_in = static_cast<double>(shape[1]) * area;
  const double fan_out = static_cast<double>(shape[0]) * area;
  return std::sqrt(6.0 / (fan_in + fan_out));
}

template <typename T>
Tensor<T> xavier_init(const Shape& shape, std::uint64_t seed) {
  Tensor<T> t(shape);
  if (shape.rank() == 1) return t;
  const double bound = xavier_bound(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const double> lrs, AdamState<T>& state) {
  if (lrs.size() != params.size()) {
    throw ShapeError("adam_step: " + std::to_string(lrs.size()) + " learning rates for " +
                     std::to_string(params.size()) + " parameters");
  }
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(static_cast<std::size_t>(params[i].numel()), T{0});
      state.v[i].assign(static_cast<std::size_t>(params[i].numel()), T{0});
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ShapeError("adam_step: optimizer state tracks " + std::to_string(state.m.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto n = static_cast<std::size_t>(params[i].numel());
    if (state.m[i].size() != n || state.v[i].size() != n) {
      throw ShapeError("adam_step: moment buffer " + std::to_string(i) +
                       " does not match parameter shape " + params[i].shape().str());
    }
  }

  ++state.step;
  const auto& h = state.hyper;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto value = params[i].data();
    auto grad = params[i].grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    const double lr = lrs[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad.empty() ? 0.0 : static_cast<double>(grad[j]);
      const double mj = h.beta1 * static_cast<double>(m[j]) + (1.0 - h.beta1) * g;
      const double vj = h.beta2 * static_cast<double>(v[j]) + (1.0 - h.beta2) * g * g;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double update = lr * (mj / c1) / (std::sqrt(vj / c2) + h.eps);
      value[j] = static_cast<T>(static_cast<double>(value[j]) - update);
    }
  }
}

template Tensor<float> xavier_init<float>(const Shape&, std::uint64_t);
template Tensor<double> xavier_init<double>(const Shape&, std::uint64_t);
template void adam_step<float>(std::span<Tensor<float>>, std::span<const double>,
                               AdamState<float>&);
template void adam_step<double>(std::span<Tensor<double>>, std::span<const double>,
                                AdamState<double>&);

}  // namespace sritm
