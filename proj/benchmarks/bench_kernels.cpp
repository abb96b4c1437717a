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

#include <benchmark/benchmark.h>

#include <random>

#include "sritm/decomposition.hpp"
#include "sritm/metrics.hpp"
#include "sritm/ops.hpp"

namespace {

using namespace sritm;

Tensor<float> filled(const Shape& s, unsigned seed, float lo = -1.0f, float hi = 1.0f) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  Tensor<float> t(s);
  for (float& v : t.data()) v = u(rng);
  return t;
}

void BM_Conv3x3(benchmark::State& state) {
  const auto c = state.range(0), size = state.range(1);
  const auto x = filled(Shape{1, c, size, size}, 1);
  const ConvParams<float> p{filled(Shape{c, c, 3, 3}, 2, -0.05f, 0.05f), filled(Shape{c}, 3)};
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, p));
  state.SetItemsProcessed(state.iterations() * c * c * 9 * size * size);
}
BENCHMARK(BM_Conv3x3)->Args({16, 32})->Args({64, 32})->Args({64, 80})->Unit(benchmark::kMillisecond);

void BM_Conv3x3Backward(benchmark::State& state) {
  const auto c = state.range(0), size = state.range(1);
  const auto x = filled(Shape{1, c, size, size}, 4);
  ConvParams<float> p{filled(Shape{c, c, 3, 3}, 5, -0.05f, 0.05f), filled(Shape{c}, 6)};
  p.weight.set_requires_grad(true);
  p.bias.set_requires_grad(true);
  for (auto _ : state) {
    backward(sum(conv2d(x, p)));
    p.weight.zero_grad();
    p.bias.zero_grad();
  }
}
BENCHMARK(BM_Conv3x3Backward)->Args({16, 32})->Args({64, 32})->Unit(benchmark::kMillisecond);

void BM_GuidedFilter(benchmark::State& state) {
  const auto size = state.range(0);
  const auto img = filled(Shape{1, 3, size, size}, 7, 0.0f, 1.0f);
  const DecompositionParams params;
  for (auto _ : state) benchmark::DoNotOptimize(guided_filter(img, params));
  state.SetItemsProcessed(state.iterations() * 3 * size * size);
}
BENCHMARK(BM_GuidedFilter)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_BicubicUpscale(benchmark::State& state) {
  const auto size = state.range(0);
  const auto img = filled(Shape{1, 3, size, size}, 8, 0.0f, 1.0f);
  for (auto _ : state) benchmark::DoNotOptimize(resize_bicubic(img, Scale{2, 1}));
}
BENCHMARK(BM_BicubicUpscale)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

Plane random_plane(int size, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Plane p(size, size);
  for (double& v : p.values) v = u(rng);
  return p;
}

void BM_Ssim(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Plane a = random_plane(size, 9), b = random_plane(size, 10);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MsSsim(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const Plane a = random_plane(size, 11), b = random_plane(size, 12);
  for (auto _ : state) benchmark::DoNotOptimize(ms_ssim(a, b));
}
BENCHMARK(BM_MsSsim)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
