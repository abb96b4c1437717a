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

#include "sritm/network.hpp"

#include <algorithm>

#include "sritm/decomposition.hpp"
#include "sritm/error.hpp"
#include "sritm/optim.hpp"

namespace sritm {

// ---------------------------------------------------------------- store

template <typename T>
void WeightStore<T>::add(const std::string& name, Tensor<T> value) {
  if (index_.contains(name)) throw ConfigError(name, "duplicate parameter name");
  index_[name] = entries_.size();
  entries_.emplace_back(name, std::move(value));
}

template <typename T>
Tensor<T>& WeightStore<T>::at(const std::string& name) {
  const auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError(name, "no such parameter");
  return entries_[it->second].second;
}

template <typename T>
const Tensor<T>& WeightStore<T>::at(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError(name, "no such parameter");
  return entries_[it->second].second;
}

template <typename T>
ConvParams<T> WeightStore<T>::conv(const std::string& prefix) const {
  return ConvParams<T>{at(prefix + ".weight"), at(prefix + ".bias")};
}

template <typename T>
std::int64_t WeightStore<T>::param_count() const {
  std::int64_t total = 0;
  for (const auto& e : entries_) total += e.second.numel();
  return total;
}

template <typename T>
bool WeightStore<T>::is_bias(const std::string& name) {
  return name.ends_with(".bias");
}

// ---------------------------------------------------------------- blocks

template <typename T>
Tensor<T> residual_branch(const Tensor<T>& x, const ResBlockParams<T>& p) {
  return conv2d(relu(conv2d(relu(x), p.conv1)), p.conv2);
}

template <typename T>
Tensor<T> skip_branch(const Tensor<T>& x, const Tensor<T>& bridge, const SkipBlockParams<T>& p) {
  const Tensor<T> reduced = conv2d(relu(concat_channels(x, bridge)), p.dr);
  return conv2d(relu(conv2d(reduced, p.conv1)), p.conv2);
}

template <typename T>
Tensor<T> res_block(const Tensor<T>& x, const ResBlockParams<T>& p) {
  return add(residual_branch(x, p), x);
}

template <typename T>
Tensor<T> compute_smf(const Tensor<T>& input, const SmfParams<T>& p) {
  Tensor<T> h = relu(conv2d(input, p.conv1));
  h = relu(conv2d(h, p.conv2));
  return relu(conv2d(h, p.conv3));
}

template <typename T>
Tensor<T> modulation_map(const Tensor<T>& smf, const ModHeadParams<T>& p) {
  return conv2d(relu(conv2d(smf, p.conv1)), p.conv2);
}

template <typename T>
Tensor<T> res_mod_block(const Tensor<T>& x, const Tensor<T>& smf, const ResBlockParams<T>& p,
                        const ModHeadParams<T>& head, Tensor<T>* map_out) {
  const Tensor<T> map = modulation_map(smf, head);
  if (map_out) *map_out = map;
  return add(mul(residual_branch(x, p), map), x);
}

template <typename T>
Tensor<T> res_skip_block(const Tensor<T>& x, const Tensor<T>& bridge, const SkipBlockParams<T>& p) {
  return add(skip_branch(x, bridge, p), x);
}

template <typename T>
Tensor<T> res_skip_mod_block(const Tensor<T>& x, const Tensor<T>& bridge, const Tensor<T>& smf,
                             const SkipBlockParams<T>& p, const ModHeadParams<T>& head,
                             Tensor<T>* map_out) {
  const Tensor<T> map = modulation_map(smf, head);
  if (map_out) *map_out = map;
  return add(mul(skip_branch(x, bridge, p), map), x);
}

template <typename T>
Tensor<T> fusion(std::span<const Tensor<T>> features, const FusionParams<T>& p) {
  if (features.empty()) throw ShapeError("fusion: no feature tensors");
  Tensor<T> x;
  if (features.size() == 1) {
    if (p.dr) throw ShapeError("fusion: DR layer given for a single feature tensor");
    x = conv2d(relu(features[0]), p.conv);
  } else {
    if (!p.dr) throw ShapeError("fusion: several feature tensors need a DR layer");
    x = conv2d(conv2d(relu(concat_channels(features)), *p.dr), p.conv);
  }
  for (const auto& b : p.blocks) x = res_block(x, b);
  return x;
}

template <typename T>
Tensor<T> synthesis(const Tensor<T>& y_f, const Tensor<T>& lr_image, const SynthesisParams<T>& p) {
  if (p.sf != 2 && p.sf != 4) throw ConfigError("sf", "must be 2 or 4");
  if ((p.sf == 4) != p.conv3.has_value()) {
    throw ShapeError("synthesis: sf = 4 needs exactly one conv between the shufflers");
  }
  Tensor<T> h = relu(conv2d(relu(y_f), p.conv1));
  h = pixel_shuffle(relu(conv2d(h, p.conv2)), 2);
  if (p.conv3) h = pixel_shuffle(relu(conv2d(h, *p.conv3)), 2);
  h = conv2d(h, p.out);
  return add(h, resize_bicubic(lr_image, Scale{p.sf, 1}, true));
}

// ---------------------------------------------------------------- structure

std::string to_string(BlockKind k) {
  switch (k) {
    case BlockKind::kRB: return "RB";
    case BlockKind::kRMB: return "RMB";
    case BlockKind::kRSB: return "RSB";
    case BlockKind::kRSMB: return "RSMB";
  }
  return "?";
}

int NetworkStructure::pixel_shufflers() const {
  return static_cast<int>(std::count(synthesis_stages.begin(), synthesis_stages.end(), "ps"));
}

int NetworkStructure::convs_between_shufflers() const {
  const auto first = std::find(synthesis_stages.begin(), synthesis_stages.end(), "ps");
  const auto last = std::find(synthesis_stages.rbegin(), synthesis_stages.rend(), "ps");
  if (first == synthesis_stages.end()) return 0;
  int n = 0;
  for (auto it = first; it != last.base() - 1; ++it) n += it->starts_with("conv") ? 1 : 0;
  return n;
}

// ---------------------------------------------------------------- network

namespace {

std::uint64_t name_seed(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (h | 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

BlockKind effective_kind(bool skip, bool modulated) {
  if (skip) return modulated ? BlockKind::kRSMB : BlockKind::kRSB;
  return modulated ? BlockKind::kRMB : BlockKind::kRB;
}

}  // namespace

template <typename T>
Network<T>::Network(NetworkConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  build();
  for (auto& [name, t] : weights_.entries()) t = xavier_init<T>(t.shape(), name_seed(seed, name));
  modulation_active_ = config_.use_modulation;
}

template <typename T>
Network<T> Network<T>::zeros(NetworkConfig config) {
  Network net(std::move(config));
  for (auto& e : net.weights_.entries()) std::fill(e.second.data().begin(), e.second.data().end(), T{0});
  return net;
}

template <typename T>
void Network<T>::register_conv(const std::string& name, std::int64_t in, std::int64_t out, int k) {
  weights_.add(name + ".weight", Tensor<T>(Shape{out, in, k, k}));
  weights_.add(name + ".bias", Tensor<T>(Shape{out}));
}

template <typename T>
void Network<T>::build() {
  layout_ = pass_layout(config_);
  const std::int64_t c = config_.base_channels;
  const bool mod = config_.use_modulation;
  structure_ = {};

  for (const auto& pass : layout_) {
    PassStructure ps;
    ps.name = pass.name;
    ps.input_channels = 3 * static_cast<std::int64_t>(pass.input.size());
    register_conv(pass.name + ".conv_in", ps.input_channels, c, 3);
    if (mod) {
      ps.smf_channels = 3 * static_cast<std::int64_t>(pass.smf_input.size());
      register_conv(pass.name + ".smf.conv1", ps.smf_channels, c, 3);
      register_conv(pass.name + ".smf.conv2", c, c, 3);
      register_conv(pass.name + ".smf.conv3", c, c, 3);
      ++structure_.smf_subnets;
    }

    auto add_block = [&](const std::string& local, BlockKind slot, bool skip, bool modulated,
                         const std::string& bridge) {
      BlockSpec b{pass.name + "." + local, slot, skip, modulated && mod, bridge};
      if (skip) {
        register_conv(b.name + ".dr", 2 * c, c, 1);
        ++structure_.dr_layers;
      }
      register_conv(b.name + ".conv1", c, c, 3);
      register_conv(b.name + ".conv2", c, c, 3);
      if (b.modulated) {
        register_conv(b.name + ".mod.conv1", c, c, 3);
        register_conv(b.name + ".mod.conv2", c, c, 3);
        ++structure_.modulation_heads;
      }
      ++ps.counts[effective_kind(b.skip, b.modulated)];
      ps.blocks.push_back(std::move(b));
    };

    const int m = config_.m;
    if (pass.bridge < 0) {
      for (int i = 1; i <= m; ++i) {
        add_block("rb" + std::to_string(i), BlockKind::kRB, false, false, "");
        add_block("rmb" + std::to_string(i), BlockKind::kRMB, false, true, "");
      }
    } else {
      const std::string src = layout_[static_cast<std::size_t>(pass.bridge)].name;
      add_block("rb1", BlockKind::kRB, false, false, "");
      for (int i = 1; i <= m; ++i) {
        add_block("rsmb" + std::to_string(i), BlockKind::kRSMB, true, true, src + ".rb" + std::to_string(i));
        if (i < m) {
          add_block("rsb" + std::to_string(i), BlockKind::kRSB, true, false,
                    src + ".rmb" + std::to_string(i));
        }
      }
    }

    // The block grammar is fixed by m; anything else is a builder bug.
    const auto count = [&](BlockKind k) { return ps.counts.contains(k) ? ps.counts.at(k) : 0; };
    const int modulated = mod ? 1 : 0;
    const bool ok = pass.bridge < 0
                        ? count(BlockKind::kRB) == m * (2 - modulated) && count(BlockKind::kRMB) == m * modulated
                        : count(BlockKind::kRB) == 1 && count(BlockKind::kRSMB) == m * modulated &&
                              count(BlockKind::kRSB) == (m - 1) + m * (1 - modulated);
    if (!ok) throw Error("network builder: block grammar violated in pass " + pass.name);
    structure_.passes.push_back(std::move(ps));
  }

  if (layout_.size() > 1) {
    register_conv("fusion.dr", c * static_cast<std::int64_t>(layout_.size()), c, 1);
    ++structure_.dr_layers;
  }
  register_conv("fusion.conv", c, c, 3);
  for (int i = 1; i <= config_.n; ++i) {
    register_conv("fusion.rb" + std::to_string(i) + ".conv1", c, c, 3);
    register_conv("fusion.rb" + std::to_string(i) + ".conv2", c, c, 3);
  }
  structure_.fusion_blocks = config_.n;

  const std::int64_t p = config_.pre_shuffle_channels;
  register_conv("synth.conv1", c, c, 3);
  register_conv("synth.conv2", c, p, 3);
  structure_.synthesis_stages = {"relu", "conv1", "relu", "conv2", "relu", "ps"};
  if (config_.sf == 4) {
    register_conv("synth.conv3", p / 4, p, 3);
    for (const char* s : {"conv3", "relu", "ps"}) structure_.synthesis_stages.emplace_back(s);
  }
  register_conv("synth.out", p / 4, config_.out_channels, 3);
  structure_.synthesis_stages.emplace_back("out");
}

template <typename T>
void Network<T>::set_modulation_enabled(bool on) {
  if (on && !config_.use_modulation) {
    throw ConfigError("use_modulation", "network was built without modulation subnets");
  }
  modulation_active_ = on;
}

template <typename T>
bool Network<T>::is_modulation_param(const std::string& name) const {
  return name.find(".smf.") != std::string::npos || name.find(".mod.") != std::string::npos;
}

template <typename T>
void Network<T>::init_modulation(std::uint64_t seed) {
  for (auto& [name, t] : weights_.entries()) {
    if (!is_modulation_param(name)) continue;
    const auto fresh = xavier_init<T>(t.shape(), name_seed(seed, name));
    std::copy(fresh.data().begin(), fresh.data().end(), t.data().begin());
  }
}

template <typename T>
std::vector<std::string> Network<T>::modulation_blocks() const {
  std::vector<std::string> out;
  for (const auto& ps : structure_.passes) {
    for (const auto& b : ps.blocks) {
      if (b.modulated) out.push_back(b.name);
    }
  }
  return out;
}

template <typename T>
void Network<T>::set_requires_grad(bool on) {
  for (auto& e : weights_.entries()) e.second.set_requires_grad(on);
}

template <typename T>
void Network<T>::zero_grad() {
  for (auto& e : weights_.entries()) e.second.zero_grad();
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& lr, ForwardTrace<T>* trace) const {
  const Shape& s = lr.shape();
  if (s.rank() != 4 || s.c() != 3) {
    throw ShapeError("forward: expected an (N, 3, H, W) image, got " + s.str());
  }
  Decomposition<T> dec;
  if (config_.use_gf) dec = decompose(lr, config_.decomposition);
  auto layer = [&](Layer l) -> const Tensor<T>& {
    switch (l) {
      case Layer::kBase: return dec.base;
      case Layer::kDetail: return dec.detail;
      case Layer::kImage: break;
    }
    return lr;
  };
  auto stack = [&](const std::vector<Layer>& layers) {
    if (layers.size() == 1) return layer(layers[0]);
    std::vector<Tensor<T>> parts;
    for (Layer l : layers) parts.push_back(layer(l));
    return concat_channels<T>(std::span<const Tensor<T>>(parts));
  };

  const bool mod = config_.use_modulation && modulation_active_;
  std::map<std::string, Tensor<T>> block_out;
  std::vector<Tensor<T>> features;
  for (std::size_t pi = 0; pi < layout_.size(); ++pi) {
    const PassSpec& pass = layout_[pi];
    Tensor<T> x = conv2d(stack(pass.input), weights_.conv(pass.name + ".conv_in"));
    if (trace) trace->features[pass.name + ".conv_in"] = x;
    Tensor<T> smf;
    if (mod) {
      const std::string sp = pass.name + ".smf.";
      smf = compute_smf(stack(pass.smf_input),
                        SmfParams<T>{weights_.conv(sp + "conv1"), weights_.conv(sp + "conv2"),
                                     weights_.conv(sp + "conv3")});
      if (trace) trace->smf[pass.name] = smf;
    }
    for (const BlockSpec& b : structure_.passes[pi].blocks) {
      const bool modulate = mod && b.modulated;
      Tensor<T> map;
      ModHeadParams<T> head;
      if (modulate) {
        head = {weights_.conv(b.name + ".mod.conv1"), weights_.conv(b.name + ".mod.conv2")};
        if (trace) trace->smf_consumed[b.name] = smf;
      }
      if (b.skip) {
        const SkipBlockParams<T> p{weights_.conv(b.name + ".dr"), weights_.conv(b.name + ".conv1"),
                                   weights_.conv(b.name + ".conv2")};
        const Tensor<T>& bridge = block_out.at(b.bridge);
        x = modulate ? res_skip_mod_block(x, bridge, smf, p, head, &map) : res_skip_block(x, bridge, p);
      } else {
        const ResBlockParams<T> p{weights_.conv(b.name + ".conv1"), weights_.conv(b.name + ".conv2")};
        x = modulate ? res_mod_block(x, smf, p, head, &map) : res_block(x, p);
      }
      if (modulate && trace) trace->modulation_maps[b.name] = map;
      block_out[b.name] = x;
    }
    if (trace) trace->features[pass.name + ".fe"] = x;
    features.push_back(x);
  }

  FusionParams<T> fp;
  if (layout_.size() > 1) fp.dr = weights_.conv("fusion.dr");
  fp.conv = weights_.conv("fusion.conv");
  for (int i = 1; i <= config_.n; ++i) {
    const std::string p = "fusion.rb" + std::to_string(i);
    fp.blocks.push_back({weights_.conv(p + ".conv1"), weights_.conv(p + ".conv2")});
  }
  const Tensor<T> y = fusion<T>(std::span<const Tensor<T>>(features), fp);
  if (trace) trace->features["fusion.y"] = y;

  SynthesisParams<T> sp;
  sp.sf = config_.sf;
  sp.conv1 = weights_.conv("synth.conv1");
  sp.conv2 = weights_.conv("synth.conv2");
  if (config_.sf == 4) sp.conv3 = weights_.conv("synth.conv3");
  sp.out = weights_.conv("synth.out");
  return synthesis(y, lr, sp);
}

template <typename T>
std::map<std::string, Tensor<T>> extract_modulation_maps(const Network<T>& net, const Tensor<T>& lr) {
  if (!net.config().use_modulation || !net.modulation_enabled()) {
    throw ConfigError("use_modulation", "modulation maps need an enabled modulation path");
  }
  NoGradGuard guard;
  ForwardTrace<T> trace;
  net.forward(lr, &trace);
  return trace.modulation_maps;
}

#define SRITM_INSTANTIATE_NET(T)                                                                   \
  template class WeightStore<T>;                                                                   \
  template class Network<T>;                                                                       \
  template Tensor<T> residual_branch<T>(const Tensor<T>&, const ResBlockParams<T>&);               \
  template Tensor<T> skip_branch<T>(const Tensor<T>&, const Tensor<T>&, const SkipBlockParams<T>&); \
  template Tensor<T> res_block<T>(const Tensor<T>&, const ResBlockParams<T>&);                     \
  template Tensor<T> compute_smf<T>(const Tensor<T>&, const SmfParams<T>&);                        \
  template Tensor<T> modulation_map<T>(const Tensor<T>&, const ModHeadParams<T>&);                 \
  template Tensor<T> res_mod_block<T>(const Tensor<T>&, const Tensor<T>&, const ResBlockParams<T>&, \
                                      const ModHeadParams<T>&, Tensor<T>*);                        \
  template Tensor<T> res_skip_block<T>(const Tensor<T>&, const Tensor<T>&,                         \
                                       const SkipBlockParams<T>&);                                 \
  template Tensor<T> res_skip_mod_block<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,   \
                                           const SkipBlockParams<T>&, const ModHeadParams<T>&,     \
                                           Tensor<T>*);                                            \
  template Tensor<T> fusion<T>(std::span<const Tensor<T>>, const FusionParams<T>&);                \
  template Tensor<T> synthesis<T>(const Tensor<T>&, const Tensor<T>&, const SynthesisParams<T>&);  \
  template std::map<std::string, Tensor<T>> extract_modulation_maps<T>(const Network<T>&,          \
                                                                       const Tensor<T>&);

SRITM_INSTANTIATE_NET(float)
SRITM_INSTANTIATE_NET(double)

#undef SRITM_INSTANTIATE_NET

}  // namespace sritm
