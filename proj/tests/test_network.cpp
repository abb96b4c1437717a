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

#include <filesystem>
#include <fstream>

#include "sritm/network.hpp"
#include "test_util.hpp"

namespace sritm {
namespace {

using testing::random_tensor;

ConvParams<double> conv(std::int64_t in, std::int64_t out, std::int64_t k, std::uint64_t seed) {
  return {random_tensor(Shape{out, in, k, k}, seed, -0.3, 0.3), random_tensor(Shape{out}, seed + 1, -0.1, 0.1)};
}

ConvParams<double> constant_conv(std::int64_t in, std::int64_t out, std::int64_t k, double bias) {
  return {Tensor<double>(Shape{out, in, k, k}, 0.0), Tensor<double>(Shape{out}, bias)};
}

ConvParams<double> zero_conv(std::int64_t in, std::int64_t out, std::int64_t k) {
  return constant_conv(in, out, k, 0.0);
}

template <typename T>
void expect_bits_equal(const Tensor<T>& a, const Tensor<T>& b) {
  ASSERT_EQ(a.shape(), b.shape());
  for (std::size_t i = 0; i < a.data().size(); ++i) ASSERT_EQ(a.data()[i], b.data()[i]) << "index " << i;
}

NetworkConfig narrow(int sf = 2) {
  NetworkConfig c = NetworkConfig::full(sf);
  c.base_channels = 8;
  c.pre_shuffle_channels = 32;
  c.n = 2;
  return c;
}

int count(const PassStructure& p, BlockKind k) { return p.counts.contains(k) ? p.counts.at(k) : 0; }

std::int64_t params_with_prefix(const WeightStore<float>& w, const std::string& prefix) {
  std::int64_t total = 0;
  for (const auto& [name, t] : w.entries())
    if (name.starts_with(prefix)) total += static_cast<std::int64_t>(t.data().size());
  return total;
}

TEST(BlockTest, ResBlockZeroWeightsIsIdentity) {
  const auto x = random_tensor(Shape{1, 4, 5, 5}, 1);
  expect_bits_equal(res_block(x, ResBlockParams<double>{zero_conv(4, 4, 3), zero_conv(4, 4, 3)}), x);
}

TEST(BlockTest, ResBlockOnePixelByHand) {
  Tensor<double> x(Shape{1, 1, 1, 1}, 2.0);
  ResBlockParams<double> p{constant_conv(1, 1, 3, -1.0), constant_conv(1, 1, 3, 0.5)};
  p.conv1.weight.at(0, 0, 1, 1) = 1.5;
  p.conv2.weight.at(0, 0, 1, 1) = 2.0;
  // relu(2) = 2, 1.5*2 - 1 = 2, relu, 2*2 + 0.5 = 4.5, plus the input
  EXPECT_EQ(res_block(x, p).item(), 6.5);

  x.data()[0] = -3.0;  // the leading relu blocks a negative input
  EXPECT_EQ(res_block(x, p).item(), -3.0 + 0.5);
}

TEST(BlockTest, ResBlockInputGradient) {
  auto x = random_tensor(Shape{1, 2, 4, 4}, 2, 0.1, 1.0);
  const ResBlockParams<double> p{conv(2, 2, 3, 3), conv(2, 2, 3, 5)};
  x.set_requires_grad(true);
  backward(sum(res_block(x, p)));
  NoGradGuard guard;
  const auto fd = testing::numeric_grad(x, [&] { return sum(res_block(x, p)).item(); });
  EXPECT_LT(testing::max_rel_diff(x.grad(), fd), 1e-5);
}

TEST(BlockTest, SmfNonnegativeAndBiasOnlyForZeroInput) {
  const SmfParams<double> p{conv(6, 4, 3, 10), conv(4, 4, 3, 12), conv(4, 4, 3, 14)};
  const auto in = random_tensor(Shape{1, 6, 6, 6}, 3);
  const auto a = compute_smf(in, p);
  expect_bits_equal(a, compute_smf(in, p));
  EXPECT_EQ(a.shape(), (Shape{1, 4, 6, 6}));
  for (double v : a.data()) EXPECT_GE(v, 0.0);

  // With zero weights everywhere the output is relu(b3) at every pixel.
  SmfParams<double> z{zero_conv(6, 4, 3), zero_conv(4, 4, 3), conv(4, 4, 3, 16)};
  std::fill(z.conv3.weight.data().begin(), z.conv3.weight.data().end(), 0.0);
  const auto out = compute_smf(in, z);
  for (int c = 0; c < 4; ++c)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) EXPECT_EQ(out.at(0, c, y, x), std::max(0.0, z.conv3.bias.data()[c]));
}

TEST(BlockTest, ModulationByOnesAndZeros) {
  const auto x = random_tensor(Shape{1, 4, 5, 5}, 4);
  const auto smf = random_tensor(Shape{1, 4, 5, 5}, 5, 0.0, 1.0);
  const auto bridge = random_tensor(Shape{1, 4, 5, 5}, 6);
  const ResBlockParams<double> rb{conv(4, 4, 3, 20), conv(4, 4, 3, 22)};
  const SkipBlockParams<double> sb{conv(8, 4, 1, 24), conv(4, 4, 3, 26), conv(4, 4, 3, 28)};
  const ModHeadParams<double> ones{constant_conv(4, 4, 3, 1.0), constant_conv(4, 4, 3, 1.0)};
  const ModHeadParams<double> zeros{zero_conv(4, 4, 3), zero_conv(4, 4, 3)};

  expect_bits_equal(res_mod_block(x, smf, rb, ones), res_block(x, rb));
  expect_bits_equal(res_mod_block(x, smf, rb, zeros), x);
  expect_bits_equal(res_skip_mod_block(x, bridge, smf, sb, ones), res_skip_block(x, bridge, sb));
  expect_bits_equal(res_skip_mod_block(x, bridge, smf, sb, zeros), x);
}

TEST(BlockTest, ModulatedBlockMatchesHandComposition) {
  const auto x = random_tensor(Shape{1, 3, 6, 6}, 7);
  const auto smf = random_tensor(Shape{1, 3, 6, 6}, 8, 0.0, 1.0);
  const auto bridge = random_tensor(Shape{1, 3, 6, 6}, 9);
  const SkipBlockParams<double> sb{conv(6, 3, 1, 30), conv(3, 3, 3, 32), conv(3, 3, 3, 34)};
  const ModHeadParams<double> head{conv(3, 3, 3, 36), conv(3, 3, 3, 38)};

  const auto stacked = concat_channels(relu(x), relu(bridge));
  const auto branch = conv2d(relu(conv2d(conv2d(stacked, sb.dr), sb.conv1)), sb.conv2);
  const auto map = conv2d(relu(conv2d(smf, head.conv1)), head.conv2);
  Tensor<double> got_map;
  const auto got = res_skip_mod_block(x, bridge, smf, sb, head, &got_map);
  for (std::size_t i = 0; i < x.data().size(); ++i) {
    EXPECT_NEAR(got.data()[i], branch.data()[i] * map.data()[i] + x.data()[i], 1e-12);
    EXPECT_EQ(got_map.data()[i], map.data()[i]);
  }
}

TEST(BlockTest, SkipBlockZeroIdentityAndBridgeOrderMatters) {
  const auto x = random_tensor(Shape{1, 4, 5, 5}, 9), bridge = random_tensor(Shape{1, 4, 5, 5}, 10);
  const SkipBlockParams<double> zero{zero_conv(8, 4, 1), zero_conv(4, 4, 3), zero_conv(4, 4, 3)};
  expect_bits_equal(res_skip_block(x, bridge, zero), x);

  const SkipBlockParams<double> p{conv(8, 4, 1, 40), conv(4, 4, 3, 42), conv(4, 4, 3, 44)};
  const auto a = skip_branch(x, bridge, p);
  const auto b = skip_branch(bridge, x, p);
  EXPECT_EQ(a.shape(), (Shape{1, 4, 5, 5}));
  EXPECT_GT(testing::max_rel_diff(a.data(), b.data()), 1e-3);
}

TEST(BlockTest, FusionWithoutBlocksAndWithDr) {
  const std::vector<Tensor<double>> two{random_tensor(Shape{1, 4, 4, 4}, 11), random_tensor(Shape{1, 4, 4, 4}, 12)};
  FusionParams<double> p{conv(8, 4, 1, 50), conv(4, 4, 3, 52), {}};
  const auto y = fusion<double>(two, p);
  const auto ref = conv2d(conv2d(relu(concat_channels(two[0], two[1])), *p.dr), p.conv);
  expect_bits_equal(y, ref);

  p.blocks.push_back({zero_conv(4, 4, 3), zero_conv(4, 4, 3)});
  expect_bits_equal(fusion<double>(two, p), ref);

  EXPECT_THROW(fusion<double>(std::span(two).first(1), p), ShapeError);
  p.dr.reset();
  EXPECT_THROW(fusion<double>(two, p), ShapeError);
}

TEST(BlockTest, ZeroSynthesisIsBicubic) {
  const auto lr = random_tensor(Shape{1, 3, 6, 5}, 13, 0.0, 1.0);
  const auto y = random_tensor(Shape{1, 8, 6, 5}, 14);
  for (int sf : {2, 4}) {
    SynthesisParams<double> p{sf, zero_conv(8, 8, 3), zero_conv(8, 32, 3), std::nullopt, zero_conv(8, 3, 3)};
    if (sf == 4) p.conv3 = zero_conv(8, 32, 3);
    const auto out = synthesis(y, lr, p);
    EXPECT_EQ(out.shape(), (Shape{1, 3, 6 * sf, 5 * sf}));
    expect_bits_equal(out, resize_bicubic(lr, Scale{sf, 1}, true));
  }
}

TEST(BlockTest, SynthesisRejectsMismatchedStages) {
  const auto lr = random_tensor(Shape{1, 3, 4, 4}, 15);
  const auto y = random_tensor(Shape{1, 8, 4, 4}, 16);
  SynthesisParams<double> p{4, zero_conv(8, 8, 3), zero_conv(8, 32, 3), std::nullopt, zero_conv(8, 3, 3)};
  EXPECT_THROW(synthesis(y, lr, p), ShapeError);
  p.sf = 3;
  EXPECT_THROW(synthesis(y, lr, p), ConfigError);
}

TEST(StructureTest, FullGrammarAndCounts) {
  for (int sf : {2, 4}) {
    const auto net = Network<float>::zeros(NetworkConfig::full(sf));
    const auto& s = net.structure();
    ASSERT_EQ(s.passes.size(), 2u);
    EXPECT_EQ(s.passes[0].name, "base");
    EXPECT_EQ(count(s.passes[0], BlockKind::kRB), 3);
    EXPECT_EQ(count(s.passes[0], BlockKind::kRMB), 3);
    EXPECT_EQ(s.passes[0].blocks.size(), 6u);
    EXPECT_EQ(s.passes[1].name, "detail");
    EXPECT_EQ(count(s.passes[1], BlockKind::kRB), 1);
    EXPECT_EQ(count(s.passes[1], BlockKind::kRSMB), 3);
    EXPECT_EQ(count(s.passes[1], BlockKind::kRSB), 2);
    EXPECT_EQ(s.fusion_blocks, 10);
    EXPECT_EQ(s.smf_subnets, 2);
    EXPECT_EQ(s.modulation_heads, 6);
    EXPECT_EQ(s.dr_layers, 5 + 1);
    EXPECT_EQ(s.passes[0].input_channels, 6);
    EXPECT_EQ(s.passes[1].input_channels, 6);
    EXPECT_EQ(s.pixel_shufflers(), sf == 2 ? 1 : 2);
    EXPECT_EQ(s.convs_between_shufflers(), sf == 2 ? 0 : 1);
  }
}

TEST(StructureTest, BlocksAlternateAndBridgeTheBasePass) {
  const auto net = Network<float>::zeros(NetworkConfig::full(2));
  const auto& base = net.structure().passes[0].blocks;
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_EQ(base[i].modulated, i % 2 == 1) << base[i].name;
  const auto& detail = net.structure().passes[1].blocks;
  EXPECT_EQ(detail[0].name, "detail.rb1");
  EXPECT_FALSE(detail[0].skip);
  for (std::size_t i = 1; i < detail.size(); ++i) {
    EXPECT_TRUE(detail[i].skip);
    EXPECT_TRUE(detail[i].bridge.starts_with("base.")) << detail[i].name;
  }
  EXPECT_EQ(detail[1].bridge, "base.rb1");
  EXPECT_EQ(detail[2].bridge, "base.rmb1");
}

TEST(StructureTest, ParameterCounts) {
  WeightStore<float> single;
  single.add("c.weight", Tensor<float>(Shape{64, 64, 3, 3}));
  single.add("c.bias", Tensor<float>(Shape{64}));
  EXPECT_EQ(single.param_count(), 36928);

  const auto net2 = Network<float>::zeros(NetworkConfig::full(2));
  const auto net4 = Network<float>::zeros(NetworkConfig::full(4));
  EXPECT_GE(net2.param_count(), 2'400'000);
  EXPECT_LE(net2.param_count(), 2'600'000);
  EXPECT_GE(net4.param_count(), 2'530'000);
  EXPECT_LE(net4.param_count(), 2'750'000);

  EXPECT_EQ(params_with_prefix(net2.weights(), "fusion.rb"), 10 * 2 * (3 * 3 * 64 * 64 + 64));
  EXPECT_EQ(params_with_prefix(net4.weights(), "synth.conv3"), 64 * 256 * 9 + 256);
  EXPECT_EQ(net4.param_count() - net2.param_count(), 64 * 256 * 9 + 256);

  std::int64_t manual = 0;
  for (const auto& [name, t] : net2.weights().entries()) manual += static_cast<std::int64_t>(t.data().size());
  EXPECT_EQ(manual, net2.param_count());
}

TEST(StructureTest, FusionWithNoBlocks) {
  NetworkConfig c = narrow();
  c.n = 0;
  const Network<double> net(c, 3);
  EXPECT_EQ(net.structure().fusion_blocks, 0);
  ForwardTrace<double> trace;
  const auto lr = random_tensor(Shape{1, 3, 8, 8}, 17, 0.05, 1.0);
  net.forward(lr, &trace);
  FusionParams<double> fp{net.weights().conv("fusion.dr"), net.weights().conv("fusion.conv"), {}};
  const std::vector<Tensor<double>> feats{trace.features.at("base.fe"), trace.features.at("detail.fe")};
  expect_bits_equal(trace.features.at("fusion.y"), fusion<double>(feats, fp));
}

TEST(StructureTest, ToyVariantWidths) {
  struct Case {
    ToyVariant v;
    std::vector<std::int64_t> widths;
  };
  for (const auto& [v, widths] : {Case{ToyVariant::kA, {3}}, Case{ToyVariant::kB, {9}}, Case{ToyVariant::kC, {3, 3}},
                                   Case{ToyVariant::kD, {6, 6}}, Case{ToyVariant::kE, {3, 3, 3}}}) {
    NetworkConfig c = NetworkConfig::toy_default();
    c.toy_variant = v;
    c.use_gf = v != ToyVariant::kA;
    c.use_skips = widths.size() > 1;
    const Network<float> net(c, 1);
    const auto& passes = net.structure().passes;
    ASSERT_EQ(passes.size(), widths.size()) << to_string(v);
    for (std::size_t i = 0; i < widths.size(); ++i) EXPECT_EQ(passes[i].input_channels, widths[i]);
    EXPECT_EQ(net.structure().dr_layers > 0, widths.size() > 1) << to_string(v);
    EXPECT_EQ(net.forward(Tensor<float>(Shape{1, 3, 8, 8}, 0.5f)).shape(), (Shape{1, 3, 16, 16}));
  }
}

TEST(StructureTest, AblationFlagsRemoveSubnets) {
  NetworkConfig c = NetworkConfig::toy_default();
  c.use_gf = false;
  c.use_skips = false;
  c.use_modulation = false;
  const Network<float> plain(c, 1);
  EXPECT_EQ(plain.structure().dr_layers, 0);
  EXPECT_EQ(plain.structure().smf_subnets, 0);
  EXPECT_EQ(plain.structure().modulation_heads, 0);
  for (const auto& [name, t] : plain.weights().entries()) EXPECT_FALSE(plain.is_modulation_param(name)) << name;

  c.use_gf = true;
  const Network<float> gf_only(c, 1);
  EXPECT_EQ(gf_only.structure().passes.size(), 2u);
  EXPECT_EQ(gf_only.structure().dr_layers, 1);  // fusion only
  for (const auto& p : gf_only.structure().passes) EXPECT_EQ(count(p, BlockKind::kRB), 2);

  c.use_skips = true;
  const Network<float> skips(c, 1);
  EXPECT_EQ(count(skips.structure().passes[1], BlockKind::kRSB), 1);
  EXPECT_EQ(skips.structure().smf_subnets, 0);
}

TEST(NetworkTest, ZeroNetworkIsBicubic) {
  const auto net = Network<float>::zeros(NetworkConfig::full(2));
  const auto lr = testing::random_tensor(Shape{1, 3, 64, 64}, 18, 0.0, 1.0).cast<float>();
  const auto out = net.forward(lr);
  EXPECT_EQ(out.shape(), (Shape{1, 3, 128, 128}));
  expect_bits_equal(out, resize_bicubic(lr, Scale{2, 1}, true));
}

TEST(NetworkTest, ZeroNetworkIsBicubicAtFour) {
  const auto net = Network<double>::zeros(narrow(4));
  const auto lr = random_tensor(Shape{2, 3, 9, 7}, 19, 0.0, 1.0);
  expect_bits_equal(net.forward(lr), resize_bicubic(lr, Scale{4, 1}, true));
}

TEST(NetworkTest, DisabledModulationMatchesNetworkWithoutSubnets) {
  Network<float> with(narrow(), 5);
  with.set_modulation_enabled(false);
  NetworkConfig c = narrow();
  c.use_modulation = false;
  Network<float> without(c, 99);
  const std::size_t copied = without.copy_matching(with);
  EXPECT_EQ(copied, without.weights().size());
  const auto lr = random_tensor(Shape{1, 3, 12, 12}, 20, 0.0, 1.0).cast<float>();
  expect_bits_equal(with.forward(lr), without.forward(lr));

  with.set_modulation_enabled(true);
  const auto modulated = with.forward(lr);
  EXPECT_GT(testing::max_rel_diff(modulated.cast<double>().data(), without.forward(lr).cast<double>().data()), 1e-6);
  EXPECT_THROW(without.set_modulation_enabled(true), ConfigError);
}

TEST(NetworkTest, OneSmfPerPassSharedByItsBlocks) {
  const Network<double> net(narrow(), 6);
  ForwardTrace<double> trace;
  net.forward(random_tensor(Shape{1, 3, 10, 10}, 21, 0.05, 1.0), &trace);
  EXPECT_EQ(trace.smf.size(), 2u);
  ASSERT_EQ(trace.smf_consumed.size(), 6u);
  for (const auto& [block, smf] : trace.smf_consumed) {
    const std::string pass = block.substr(0, block.find('.'));
    EXPECT_TRUE(smf.same_storage(trace.smf.at(pass))) << block;
  }
}

TEST(NetworkTest, ModulationMapsByName) {
  const Network<float> net(NetworkConfig::toy_default(), 7);
  const auto lr = random_tensor(Shape{2, 3, 8, 12}, 22, 0.05, 1.0).cast<float>();
  const auto maps = extract_modulation_maps(net, lr);
  EXPECT_EQ(maps.size(), net.modulation_blocks().size());
  ASSERT_TRUE(maps.contains("base.rmb1"));
  ASSERT_TRUE(maps.contains("detail.rsmb1"));
  EXPECT_EQ(maps.at("base.rmb1").shape(), (Shape{2, 16, 8, 12}));

  const auto full = Network<float>::zeros(NetworkConfig::full(2));
  const auto full_maps = extract_modulation_maps(full, Tensor<float>(Shape{1, 3, 6, 6}, 0.3f));
  EXPECT_EQ(full_maps.size(), 6u);
  EXPECT_EQ(full_maps.at("detail.rsmb3").shape(), (Shape{1, 64, 6, 6}));

  Network<float> off(NetworkConfig::toy_default(), 7);
  off.set_modulation_enabled(false);
  EXPECT_THROW(extract_modulation_maps(off, lr), ConfigError);
}

TEST(NetworkTest, ModulationHeadsWithOnlyBiasGiveConstantMaps) {
  Network<double> net(NetworkConfig::toy_default(), 8);
  for (auto& [name, t] : net.weights().entries())
    if (name.find(".mod.conv") != std::string::npos && name.ends_with(".weight")) std::fill(t.data().begin(), t.data().end(), 0.0);
  const auto maps = extract_modulation_maps(net, random_tensor(Shape{1, 3, 6, 6}, 23, 0.05, 1.0));
  for (const auto& [name, map] : maps) {
    const auto& bias = net.weights().at(name + ".mod.conv2.bias");
    for (int c = 0; c < 16; ++c)
      for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) ASSERT_EQ(map.at(0, c, y, x), bias.data()[c]) << name;
  }
}

TEST(NetworkTest, SeededInitIsDeterministic) {
  const Network<float> a(NetworkConfig::toy_default(), 11), b(NetworkConfig::toy_default(), 11);
  const Network<float> c(NetworkConfig::toy_default(), 12);
  bool differs = false;
  for (std::size_t i = 0; i < a.weights().size(); ++i) {
    expect_bits_equal(a.weights().entries()[i].second, b.weights().entries()[i].second);
    const auto& x = a.weights().entries()[i].second.data();
    const auto& y = c.weights().entries()[i].second.data();
    differs = differs || !std::equal(x.begin(), x.end(), y.begin());
  }
  EXPECT_TRUE(differs);
}

TEST(NetworkTest, RejectsNonImageInput) {
  const Network<float> net(NetworkConfig::toy_default(), 1);
  EXPECT_THROW(net.forward(Tensor<float>(Shape{1, 4, 8, 8})), ShapeError);
}

TEST(NetworkTest, ForwardGradientReachesEveryParameter) {
  NetworkConfig c = NetworkConfig::toy_default();
  c.base_channels = 4;
  c.pre_shuffle_channels = 16;
  Network<double> net(c, 13);
  net.set_requires_grad(true);
  const auto lr = random_tensor(Shape{1, 3, 8, 8}, 24, 0.05, 1.0);
  backward(mse_loss(net.forward(lr), random_tensor(Shape{1, 3, 16, 16}, 25, 0.0, 1.0)));
  for (const auto& [name, t] : net.weights().entries()) EXPECT_TRUE(t.has_grad()) << name;
}

TEST(ConfigTest, KeysRoundTripAndValidate) {
  NetworkConfig c = NetworkConfig::full(4);
  c.use_skips = false;
  c.smf_input = SmfInput::kImage;
  NetworkConfig d;
  for (const auto& [k, v] : c.entries()) EXPECT_TRUE(d.set(k, v)) << k;
  EXPECT_EQ(c, d);
  EXPECT_EQ(c.fingerprint(), d.fingerprint());
  EXPECT_NE(c.fingerprint(), NetworkConfig::full(2).fingerprint());

  EXPECT_FALSE(d.set("no_such_key", "1"));
  EXPECT_THROW(d.set("sf", "two"), ConfigError);
  NetworkConfig bad = NetworkConfig::full(3);
  try {
    bad.validate();
    FAIL() << "sf = 3 accepted";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "sf");
  }
  EXPECT_THROW(Network<float>{bad}, ConfigError);
}

class WeightsIoTest : public ::testing::Test {
 protected:
  testing::TempDir dir_{"weights"};
};

TEST_F(WeightsIoTest, RoundTripIsBitExact) {
  const Network<float> net(NetworkConfig::toy_default(), 14);
  save_weights(net.weights(), dir_ / "w.bin");
  const auto loaded = load_weights(dir_ / "w.bin", NetworkConfig::toy_default());
  const auto lr = random_tensor(Shape{1, 3, 8, 8}, 26, 0.0, 1.0).cast<float>();
  expect_bits_equal(net.forward(lr), loaded.forward(lr));
  for (std::size_t i = 0; i < net.weights().size(); ++i) {
    EXPECT_EQ(net.weights().entries()[i].first, loaded.weights().entries()[i].first);
    expect_bits_equal(net.weights().entries()[i].second, loaded.weights().entries()[i].second);
  }
}

TEST_F(WeightsIoTest, TruncatedFileReportsOffset) {
  const Network<float> net(NetworkConfig::toy_default(), 15);
  save_weights(net.weights(), dir_ / "w.bin");
  const auto size = std::filesystem::file_size(dir_ / "w.bin");
  std::filesystem::resize_file(dir_ / "w.bin", size - 10);
  try {
    load_weights(dir_ / "w.bin", NetworkConfig::toy_default());
    FAIL() << "truncated file loaded";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("w.bin"), std::string::npos);
    EXPECT_GT(e.offset(), 0u);
    EXPECT_LE(e.offset(), size);
  }
}

TEST_F(WeightsIoTest, ScaleMismatchNamesTheTensor) {
  NetworkConfig c2 = narrow(2), c4 = narrow(4);
  save_weights(Network<float>::zeros(c2).weights(), dir_ / "sf2.bin");
  try {
    load_weights(dir_ / "sf2.bin", c4);
    FAIL() << "sf=2 weights loaded into sf=4";
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    EXPECT_TRUE(what.find("synth.conv3") != std::string::npos || what.find("synth.out") != std::string::npos) << what;
  }
  save_weights(Network<float>::zeros(c4).weights(), dir_ / "sf4.bin");
  try {
    load_weights(dir_ / "sf4.bin", c2);
    FAIL() << "sf=4 weights loaded into sf=2";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("synth.conv3"), std::string::npos);
  }
}

TEST_F(WeightsIoTest, MissingFileIsIoError) {
  EXPECT_THROW(load_weights(dir_ / "absent.bin", NetworkConfig::toy_default()), IoError);
}

}  // namespace
}  // namespace sritm
