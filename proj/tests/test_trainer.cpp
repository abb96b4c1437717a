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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "sritm/trainer.hpp"
#include "test_util.hpp"

namespace sritm {
namespace {

std::vector<PairSample> toy_samples(std::uint64_t seed = 1, int count = 4) {
  DatasetSpec spec;
  spec.patch_size = 16;
  spec.patches_min = spec.patches_max = count;
  spec.seed = seed;
  const auto scene = synth_scene(seed, 48, 48);
  return extract_pairs(scene.hdr, scene.sdr, 0, spec);
}

TrainConfig short_schedule(std::int64_t s1, std::int64_t s2) {
  TrainConfig c;
  c.stage1_iters = s1;
  c.stage2_iters = s2;
  c.lr_weights = 1e-3;
  c.lr_biases = 1e-4;
  c.batch_size = 2;
  c.seed = 5;
  return c;
}

std::vector<double> losses(const TrainLog& log) {
  std::vector<double> out;
  for (const auto& e : log.entries) out.push_back(e.loss);
  return out;
}

void expect_same_weights(const WeightStore<float>& a, const WeightStore<float>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a.entries()[i].first, b.entries()[i].first);
    const auto& x = a.entries()[i].second.data();
    const auto& y = b.entries()[i].second.data();
    ASSERT_TRUE(std::equal(x.begin(), x.end(), y.begin())) << a.entries()[i].first;
  }
}

Optimizer all_params(const Network<float>& net, double lw, double lb) {
  Optimizer opt;
  opt.lr_weights = lw;
  opt.lr_biases = lb;
  for (const auto& [name, t] : net.weights().entries()) opt.params.push_back(name);
  return opt;
}

TEST(TrainConfigTest, DefaultsKeysAndValidation) {
  const TrainConfig d;
  EXPECT_EQ(d.stage1_iters, 490000);
  EXPECT_EQ(d.stage2_iters, 660000);
  EXPECT_EQ(d.lr_weights, 5e-7);
  EXPECT_EQ(d.lr_biases, 5e-8);
  EXPECT_EQ(d.batch_size, 16);

  TrainConfig c;
  for (const auto& [k, v] : short_schedule(3, 4).entries()) EXPECT_TRUE(c.set(k, v)) << k;
  EXPECT_EQ(c.entries(), short_schedule(3, 4).entries());
  EXPECT_FALSE(c.set("radius", "3"));
  EXPECT_THROW(c.set("batch_size", "x"), ConfigError);

  c.lr_biases = 0;
  try {
    c.validate();
    FAIL() << "zero lr accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "lr_biases");
  }
  c = short_schedule(1, 1);
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(TrainConfigTest, DeskPreset) {
  const DeskPreset p = desk_preset();
  EXPECT_TRUE(p.network.toy);
  EXPECT_EQ(p.train.total_iters(), 2000);
  EXPECT_EQ(p.train.max_samples, 4u);
  EXPECT_NO_THROW(p.train.validate());
  EXPECT_NO_THROW(p.data.validate());
}

TEST(TrainStepTest, ZeroNetworkLossIsBicubicError) {
  auto net = Network<float>::zeros(NetworkConfig::toy_default());
  net.set_modulation_enabled(false);
  const auto data = toy_samples();
  const std::size_t idx[] = {0, 2};
  const Batch batch = collate(data, idx);
  const Tensor<float> bic = resize_bicubic(batch.lr, Scale{2, 1}, true);
  double mse = 0;
  for (std::size_t i = 0; i < bic.data().size(); ++i)
    mse += std::pow(static_cast<double>(bic.data()[i]) - batch.hr.data()[i], 2);
  mse /= static_cast<double>(bic.data().size());
  Optimizer opt = all_params(net, 1e-3, 1e-4);
  for (auto& [name, t] : net.weights().entries()) t.set_requires_grad(!net.is_modulation_param(name));
  opt.params.erase(std::remove_if(opt.params.begin(), opt.params.end(),
                                  [&](const std::string& n) { return net.is_modulation_param(n); }),
                   opt.params.end());
  EXPECT_NEAR(train_step(net, batch, opt), mse, 1e-6 * mse);
}

TEST(TrainStepTest, FirstStepSizesFollowTheGroupRates) {
  Network<float> net(NetworkConfig::toy_default(), 3);
  net.set_requires_grad(true);
  Optimizer opt = all_params(net, 1e-3, 1e-4);
  const Network<float> before(NetworkConfig::toy_default(), 3);
  const auto data = toy_samples();
  const std::size_t idx[] = {0, 1, 2, 3};
  train_step(net, collate(data, idx), opt);
  double max_w = 0, max_b = 0;
  for (std::size_t i = 0; i < net.weights().size(); ++i) {
    const auto& [name, t] = net.weights().entries()[i];
    const auto& old = before.weights().entries()[i].second;
    for (std::size_t k = 0; k < t.data().size(); ++k) {
      double& worst = WeightStore<float>::is_bias(name) ? max_b : max_w;
      worst = std::max(worst, std::abs(static_cast<double>(t.data()[k]) - old.data()[k]));
    }
  }
  EXPECT_NEAR(max_w, 1e-3, 1e-5);
  EXPECT_NEAR(max_b, 1e-4, 1e-6);
  for (const auto& [name, t] : net.weights().entries()) EXPECT_FALSE(t.has_grad()) << name;
}

TEST(TrainStepTest, SecondStepOnSameBatchDescends) {
  int descended = 0;
  const auto data = toy_samples(2);
  const std::size_t idx[] = {0, 1};
  const Batch batch = collate(data, idx);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Network<float> net(NetworkConfig::toy_default(), seed);
    net.set_requires_grad(true);
    Optimizer opt = all_params(net, 1e-4, 1e-5);
    const double first = train_step(net, batch, opt);
    const double second = train_step(net, batch, opt);
    descended += second <= first ? 1 : 0;
  }
  EXPECT_GE(descended, 4);
}

TEST(TrainStepTest, CollateAndShapeErrors) {
  auto data = toy_samples();
  const std::size_t idx[] = {3, 1};
  const Batch b = collate(data, idx);
  EXPECT_EQ(b.lr.shape(), (Shape{2, 3, 8, 8}));
  EXPECT_EQ(b.hr.shape(), (Shape{2, 3, 16, 16}));
  EXPECT_EQ(b.lr.at(0, 2, 4, 5), data[3].lr.at(0, 2, 4, 5));
  EXPECT_EQ(b.hr.at(1, 0, 7, 9), data[1].hr.at(0, 0, 7, 9));
  EXPECT_THROW(collate(data, std::span<const std::size_t>{}), ShapeError);

  NetworkConfig sf4 = NetworkConfig::toy_default();
  sf4.sf = 4;
  EXPECT_THROW(Trainer(sf4, short_schedule(1, 1), data), ShapeError);
  EXPECT_THROW(Trainer(NetworkConfig::toy_default(), short_schedule(1, 1), {}), ConfigError);
}

TEST(TrainerTest, StageOneMatchesNetworkWithoutModulation) {
  NetworkConfig plain = NetworkConfig::toy_default();
  plain.use_modulation = false;
  Trainer with(NetworkConfig::toy_default(), short_schedule(20, 5), toy_samples());
  Trainer without(plain, short_schedule(20, 5), toy_samples());
  with.run(20);
  without.run(20);
  EXPECT_EQ(losses(with.log()), losses(without.log()));
  for (const auto& [name, t] : without.network().weights().entries()) {
    const auto& other = with.network().weights().at(name);
    ASSERT_TRUE(std::equal(t.data().begin(), t.data().end(), other.data().begin())) << name;
  }
  const auto lr = testing::random_tensor(Shape{1, 3, 8, 8}, 4, 0.0, 1.0).cast<float>();
  const auto a = with.network().forward(lr), b = without.network().forward(lr);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));

  EXPECT_FALSE(with.network().modulation_enabled());
  with.step();
  EXPECT_TRUE(with.network().modulation_enabled());
  EXPECT_EQ(with.log().stage_boundary, 20);
}

TEST(TrainerTest, LogInvariantsAndJointSchedule) {
  Trainer t(NetworkConfig::toy_default(), short_schedule(6, 6), toy_samples());
  std::ostringstream text;
  t.run_all(&text);
  ASSERT_EQ(t.log().entries.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(t.log().entries[i].iter, static_cast<std::int64_t>(i + 1));
    EXPECT_EQ(t.log().entries[i].stage, i < 6 ? 1 : 2);
  }
  const std::string s = text.str();
  const auto first = s.find("event=stage_boundary");
  ASSERT_NE(first, std::string::npos);
  EXPECT_EQ(s.find("event=stage_boundary", first + 1), std::string::npos);
  EXPECT_NE(s.find("iter=1 stage=1 loss="), std::string::npos);
  EXPECT_NE(s.find("iter=12 stage=2 loss="), std::string::npos);

  Trainer joint(NetworkConfig::toy_default(), short_schedule(0, 4), toy_samples());
  EXPECT_TRUE(joint.network().modulation_enabled());
  joint.run_all();
  EXPECT_EQ(joint.log().stage_boundary, 0);
  for (const auto& e : joint.log().entries) EXPECT_EQ(e.stage, 2);
}

TEST(TrainerTest, DeterministicPerSeed) {
  Trainer a(NetworkConfig::toy_default(), short_schedule(5, 5), toy_samples());
  Trainer b(NetworkConfig::toy_default(), short_schedule(5, 5), toy_samples());
  a.run_all();
  b.run_all();
  EXPECT_EQ(losses(a.log()), losses(b.log()));
  expect_same_weights(a.network().weights(), b.network().weights());

  TrainConfig other = short_schedule(5, 5);
  other.seed = 6;
  Trainer c(NetworkConfig::toy_default(), other, toy_samples());
  c.run_all();
  EXPECT_NE(losses(a.log()), losses(c.log()));
}

TEST(TrainerTest, LossFallsOnSmallSet) {
  TrainConfig cfg = short_schedule(60, 140);
  cfg.batch_size = 4;
  Trainer t(NetworkConfig::toy_default(), cfg, toy_samples());
  const double before = dataset_psnr(t.network(), t.data());
  t.run_all();
  const auto& e = t.log().entries;
  double head = 0, tail = 0;
  for (int i = 0; i < 10; ++i) {
    head += e[static_cast<std::size_t>(i)].loss;
    tail += e[e.size() - 1 - static_cast<std::size_t>(i)].loss;
  }
  EXPECT_LT(tail, head / 3);
  EXPECT_GT(dataset_psnr(t.network(), t.data()), before + 3.0);
}

TEST(TrainerTest, DatasetPsnrPoolsAllSamples) {
  const auto data = toy_samples();
  const auto net = Network<float>::zeros(NetworkConfig::toy_default());
  double sq = 0;
  std::size_t n = 0;
  for (const auto& s : data) {
    const auto bic = resize_bicubic(s.lr, Scale{2, 1}, true);
    for (std::size_t i = 0; i < bic.data().size(); ++i) sq += std::pow(double(bic.data()[i]) - s.hr.data()[i], 2);
    n += bic.data().size();
  }
  EXPECT_NEAR(dataset_psnr(net, data), 10 * std::log10(n / sq), 1e-4);
}

class CheckpointTest : public ::testing::Test {
 protected:
  testing::TempDir dir_{"ckpt"};
};

TEST_F(CheckpointTest, ResumeIsBitExactAcrossTheBoundary) {
  Trainer straight(NetworkConfig::toy_default(), short_schedule(8, 8), toy_samples());
  straight.run_all();
  const auto trace = losses(straight.log());

  for (std::int64_t k : {4, 8, 12}) {
    Trainer first(NetworkConfig::toy_default(), short_schedule(8, 8), toy_samples());
    first.run(k);
    const auto path = dir_ / ("at" + std::to_string(k) + ".ckpt");
    first.save_checkpoint(path);
    Trainer resumed = Trainer::resume(path, NetworkConfig::toy_default(), short_schedule(8, 8), toy_samples());
    EXPECT_EQ(resumed.iteration(), k);
    EXPECT_EQ(resumed.network().modulation_enabled(), k > 8);
    resumed.run_all();
    const auto tail = losses(resumed.log());
    ASSERT_EQ(tail.size(), static_cast<std::size_t>(16 - k));
    for (std::size_t i = 0; i < tail.size(); ++i) EXPECT_EQ(tail[i], trace[static_cast<std::size_t>(k) + i]) << k;
    expect_same_weights(resumed.network().weights(), straight.network().weights());
    EXPECT_EQ(resumed.log().stage_boundary, 8);
  }
}

TEST_F(CheckpointTest, DifferentNetworkIsRejected) {
  Trainer t(NetworkConfig::toy_default(), short_schedule(2, 2), toy_samples());
  t.run(2);
  t.save_checkpoint(dir_ / "c.ckpt");
  NetworkConfig other = NetworkConfig::toy_default();
  other.base_channels = 8;
  EXPECT_THROW(Trainer::resume(dir_ / "c.ckpt", other, short_schedule(2, 2), toy_samples()), ConfigError);
  EXPECT_THROW(Trainer::resume(dir_ / "missing.ckpt", NetworkConfig::toy_default(), short_schedule(2, 2), toy_samples()),
               IoError);
}

TEST_F(CheckpointTest, DivergenceWritesCheckpoint) {
  auto data = toy_samples();
  for (auto& s : data) s.hr.data()[0] = std::numeric_limits<float>::quiet_NaN();
  Trainer t(NetworkConfig::toy_default(), short_schedule(2, 2), data);
  t.divergence_checkpoint = dir_ / "div.ckpt";
  EXPECT_THROW(t.step(), NumericError);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "div.ckpt"));
}

TEST_F(CheckpointTest, PeriodicCheckpoints) {
  TrainConfig cfg = short_schedule(3, 3);
  cfg.checkpoint_every = 2;
  Trainer t(NetworkConfig::toy_default(), cfg, toy_samples());
  t.checkpoint_dir = dir_ / "periodic";
  t.run_all();
  for (int i : {2, 4, 6}) {
    char name[64];
    std::snprintf(name, sizeof name, "checkpoint_%08d.ckpt", i);
    EXPECT_TRUE(std::filesystem::exists(dir_ / "periodic" / name)) << name;
  }
}

}  // namespace
}  // namespace sritm
