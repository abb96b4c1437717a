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

#include "sritm/network.hpp"
#include "sritm/trainer.hpp"

namespace {

using namespace sritm;

Tensor<float> image(std::int64_t n, std::int64_t size, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Tensor<float> t(Shape{n, 3, size, size});
  for (float& v : t.data()) v = u(rng);
  return t;
}

void BM_ToyForward(benchmark::State& state) {
  const Network<float> net(NetworkConfig::toy_default(), 1);
  const auto lr = image(1, state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(lr));
}
BENCHMARK(BM_ToyForward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_FullForward(benchmark::State& state) {
  const Network<float> net(NetworkConfig::full(static_cast<int>(state.range(0))), 3);
  const auto lr = image(1, 32, 4);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(lr));
}
BENCHMARK(BM_FullForward)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_ToyTrainStep(benchmark::State& state) {
  const DeskPreset preset = desk_preset();
  Network<float> net(preset.network, 5);
  const auto batch_size = state.range(0);
  const Batch batch{image(batch_size, 16, 6), image(batch_size, 32, 7)};
  Optimizer opt;
  opt.lr_weights = preset.train.lr_weights;
  opt.lr_biases = preset.train.lr_biases;
  for (const auto& [name, t] : net.weights().entries()) opt.params.push_back(name);
  net.set_requires_grad(true);
  for (auto _ : state) benchmark::DoNotOptimize(train_step(net, batch, opt));
}
BENCHMARK(BM_ToyTrainStep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
