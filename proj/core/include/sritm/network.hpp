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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sritm/network_config.hpp"
#include "sritm/ops.hpp"
#include "sritm/tensor.hpp"
#include "sritm/tensor_file.hpp"

namespace sritm {

/// Named parameters in registration order. Names are hierarchical, e.g.
/// `base.rb1.conv1.weight`; every conv contributes `.weight` and `.bias`.
template <typename T>
class WeightStore {
 public:
  void add(const std::string& name, Tensor<T> value);
  bool contains(const std::string& name) const { return index_.contains(name); }
  Tensor<T>& at(const std::string& name);
  const Tensor<T>& at(const std::string& name) const;
  ConvParams<T> conv(const std::string& prefix) const;

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<std::pair<std::string, Tensor<T>>>& entries() const noexcept { return entries_; }
  std::vector<std::pair<std::string, Tensor<T>>>& entries() noexcept { return entries_; }

  std::int64_t param_count() const;
  static bool is_bias(const std::string& name);

 private:
  std::vector<std::pair<std::string, Tensor<T>>> entries_;
  std::map<std::string, std::size_t> index_;
};

template <typename T>
struct ResBlockParams {
  ConvParams<T> conv1, conv2;
};
template <typename T>
struct SkipBlockParams {
  ConvParams<T> dr, conv1, conv2;
};
template <typename T>
struct ModHeadParams {
  ConvParams<T> conv1, conv2;
};
template <typename T>
struct SmfParams {
  ConvParams<T> conv1, conv2, conv3;
};
template <typename T>
struct FusionParams {
  std::optional<ConvParams<T>> dr;  // absent for a single pass
  ConvParams<T> conv;
  std::vector<ResBlockParams<T>> blocks;
};
template <typename T>
struct SynthesisParams {
  int sf = 2;
  ConvParams<T> conv1, conv2;
  std::optional<ConvParams<T>> conv3;  // between the two shufflers when sf = 4
  ConvParams<T> out;
};

/// conv2(relu(conv1(relu(x)))), the residual branch shared by all blocks.
template <typename T>
Tensor<T> residual_branch(const Tensor<T>& x, const ResBlockParams<T>& p);
/// conv2(relu(conv1(dr(relu([x bridge]))))).
template <typename T>
Tensor<T> skip_branch(const Tensor<T>& x, const Tensor<T>& bridge, const SkipBlockParams<T>& p);

template <typename T>
Tensor<T> res_block(const Tensor<T>& x, const ResBlockParams<T>& p);
/// relu(conv3(relu(conv2(relu(conv1(input)))))).
template <typename T>
Tensor<T> compute_smf(const Tensor<T>& input, const SmfParams<T>& p);
/// conv2(relu(conv1(smf))), the map multiplied into the main path.
template <typename T>
Tensor<T> modulation_map(const Tensor<T>& smf, const ModHeadParams<T>& p);
template <typename T>
Tensor<T> res_mod_block(const Tensor<T>& x, const Tensor<T>& smf, const ResBlockParams<T>& p,
                        const ModHeadParams<T>& head, Tensor<T>* map_out = nullptr);
template <typename T>
Tensor<T> res_skip_block(const Tensor<T>& x, const Tensor<T>& bridge, const SkipBlockParams<T>& p);
template <typename T>
Tensor<T> res_skip_mod_block(const Tensor<T>& x, const Tensor<T>& bridge, const Tensor<T>& smf,
                             const SkipBlockParams<T>& p, const ModHeadParams<T>& head,
                             Tensor<T>* map_out = nullptr);
/// conv(dr(relu([f_1 ... f_k]))) followed by the fusion ResBlocks; with a
/// single feature tensor the DR layer is skipped.
template <typename T>
Tensor<T> fusion(std::span<const Tensor<T>> features, const FusionParams<T>& p);
/// Upsampling head plus the bicubic global residual of `lr_image`.
template <typename T>
Tensor<T> synthesis(const Tensor<T>& y_f, const Tensor<T>& lr_image, const SynthesisParams<T>& p);

enum class BlockKind { kRB, kRMB, kRSB, kRSMB };
std::string to_string(BlockKind k);

struct BlockSpec {
  std::string name;    // e.g. "detail.rsmb2"
  BlockKind slot;      // kind with every feature the config enables
  bool skip = false;   // consumes a bridged tensor through a DR layer
  bool modulated = false;
  std::string bridge;  // name of the bridged block, if any
};

struct PassStructure {
  std::string name;
  std::int64_t input_channels = 0;
  std::int64_t smf_channels = 0;  // 0 without modulation
  std::vector<BlockSpec> blocks;
  std::map<BlockKind, int> counts;
};

struct NetworkStructure {
  std::vector<PassStructure> passes;
  int fusion_blocks = 0;
  int dr_layers = 0;
  int smf_subnets = 0;
  int modulation_heads = 0;
  /// Synthesis stages in application order, e.g. relu, conv1, ..., ps, out.
  std::vector<std::string> synthesis_stages;
  int pixel_shufflers() const;
  /// Convolutions strictly between the first and last pixel shuffler.
  int convs_between_shufflers() const;
};

/// Optional per-forward record of intermediate tensors.
template <typename T>
struct ForwardTrace {
  std::map<std::string, Tensor<T>> modulation_maps;  // keyed by block name
  std::map<std::string, Tensor<T>> smf;              // keyed by pass name
  std::map<std::string, Tensor<T>> smf_consumed;     // SMF handed to each block
  std::map<std::string, Tensor<T>> features;         // "<pass>.conv_in", "<pass>.fe", "fusion.y"
};

template <typename T>
class Network {
 public:
  /// Builds the graph and Xavier-initializes every parameter from `seed`.
  explicit Network(NetworkConfig config, std::uint64_t seed = 0);
  /// Same graph with all parameters zero.
  static Network zeros(NetworkConfig config);

  const NetworkConfig& config() const noexcept { return config_; }
  const NetworkStructure& structure() const noexcept { return structure_; }
  WeightStore<T>& weights() noexcept { return weights_; }
  const WeightStore<T>& weights() const noexcept { return weights_; }
  std::int64_t param_count() const { return weights_.param_count(); }

  /// Runtime switch for the two-stage schedule. When off, modulated blocks
  /// run as their unmodulated counterparts and the SMF subnets are skipped.
  bool modulation_enabled() const noexcept { return modulation_active_; }
  void set_modulation_enabled(bool on);

  bool is_modulation_param(const std::string& name) const;
  /// Xavier re-initialization of the SMF subnets and modulation heads.
  void init_modulation(std::uint64_t seed);

  /// (N, 3, h, w) code values -> (N, 3, sf*h, sf*w).
  Tensor<T> forward(const Tensor<T>& lr, ForwardTrace<T>* trace = nullptr) const;

  /// Names of the modulated blocks, in forward order.
  std::vector<std::string> modulation_blocks() const;

  /// Copies every tensor whose name and shape match `other`; returns the
  /// number copied.
  template <typename U>
  std::size_t copy_matching(const Network<U>& other);

  void set_requires_grad(bool on);
  void zero_grad();

 private:
  void build();
  void register_conv(const std::string& name, std::int64_t in, std::int64_t out, int k);

  NetworkConfig config_;
  NetworkStructure structure_;
  std::vector<PassSpec> layout_;
  WeightStore<T> weights_;
  bool modulation_active_ = false;
};

/// Forward pass returning the maps multiplied into the main path, by block
/// name. Throws ConfigError when modulation is absent or disabled.
template <typename T>
std::map<std::string, Tensor<T>> extract_modulation_maps(const Network<T>& net, const Tensor<T>& lr);

template <typename T>
template <typename U>
std::size_t Network<T>::copy_matching(const Network<U>& other) {
  std::size_t copied = 0;
  for (auto& [name, tensor] : weights_.entries()) {
    if (!other.weights().contains(name)) continue;
    const auto& src = other.weights().at(name);
    if (!(src.shape() == tensor.shape())) continue;
    auto s = src.data();
    auto d = tensor.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<T>(s[i]);
    ++copied;
  }
  return copied;
}

/// Weight file I/O in the tensor-section encoding. Loading validates every
/// name and shape against `config`.
void save_weights(const WeightStore<float>& weights, const std::filesystem::path& path);
Network<float> load_weights(const std::filesystem::path& path, const NetworkConfig& config);

/// Assigns file records to a store: an unknown name throws ConfigError, a
/// missing tensor or shape mismatch throws ShapeError; both name the tensor.
void assign_records(WeightStore<float>& store, std::span<const TensorRecord> records,
                    const std::string& source);
std::vector<TensorRecord> to_records(const WeightStore<float>& store);

extern template class WeightStore<float>;
extern template class WeightStore<double>;
extern template class Network<float>;
extern template class Network<double>;

}  // namespace sritm
