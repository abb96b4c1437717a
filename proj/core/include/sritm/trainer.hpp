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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sritm/dataset.hpp"
#include "sritm/network.hpp"
#include "sritm/optim.hpp"

namespace sritm {

struct TrainConfig {
  std::int64_t stage1_iters = 490000;
  std::int64_t stage2_iters = 660000;
  double lr_weights = 5e-7;
  double lr_biases = 5e-8;
  int batch_size = 16;
  std::int64_t eval_every = 0;        // 0 disables validation
  std::int64_t checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::uint64_t seed = 0;
  /// Use only the first `max_samples` samples (0 = all).
  std::size_t max_samples = 0;

  std::int64_t total_iters() const { return stage1_iters + stage2_iters; }
  void validate() const;
  bool set(const std::string& key, const std::string& value);
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Desk-scale setup: reduced network, a handful of small synthetic pairs
/// and a few thousand iterations.
struct DeskPreset {
  NetworkConfig network;
  TrainConfig train;
  DatasetSpec data;
  int frame_size = 64;
  int frames = 1;
};
DeskPreset desk_preset();

struct TrainLogEntry {
  std::int64_t iter = 0;  // 1-based index of the completed step
  int stage = 1;
  double loss = 0.0;
  std::optional<double> psnr;
};

struct TrainLog {
  std::vector<TrainLogEntry> entries;
  /// Iteration index at which stage 2 began (0 when stage 1 is empty).
  std::optional<std::int64_t> stage_boundary;
};

/// A mini-batch collated to (B, 3, h, w) / (B, 3, sf h, sf w).
struct Batch {
  Tensor<float> lr;
  Tensor<float> hr;
};
Batch collate(std::span<const PairSample> samples, std::span<const std::size_t> indices);

/// Adam state plus the per-group learning rates.
struct Optimizer {
  AdamState<float> adam;
  double lr_weights = 5e-7;
  double lr_biases = 5e-8;
  /// Parameter names in the order adam's moment buffers follow.
  std::vector<std::string> params;
};

/// Forward, L2 loss, backward and one Adam step over `opt.params`;
/// gradients are cleared afterwards. Returns the loss before the update.
double train_step(Network<float>& net, const Batch& batch, Optimizer& opt);

/// PSNR (peak 1) of the network's predictions pooled over all samples.
double dataset_psnr(const Network<float>& net, std::span<const PairSample> samples);

class Trainer {
 public:
  Trainer(NetworkConfig net_config, TrainConfig config, std::vector<PairSample> data);

  /// Restores network, optimizer and position from a checkpoint written for
  /// the same network configuration.
  static Trainer resume(const std::filesystem::path& checkpoint, NetworkConfig net_config,
                        TrainConfig config, std::vector<PairSample> data);

  /// Runs steps until `iteration() == until` (capped at the schedule end),
  /// streaming log lines to `log` when given.
  void run(std::int64_t until, std::ostream* log = nullptr);
  void run_all(std::ostream* log = nullptr) { run(config_.total_iters(), log); }
  /// One step; returns its loss.
  double step(std::ostream* log = nullptr);

  void save_checkpoint(const std::filesystem::path& path) const;

  std::int64_t iteration() const noexcept { return iteration_; }
  int stage() const noexcept { return iteration_ < config_.stage1_iters ? 1 : 2; }
  const Network<float>& network() const noexcept { return net_; }
  Network<float>& network() noexcept { return net_; }
  const TrainLog& log() const noexcept { return log_; }
  const TrainConfig& config() const noexcept { return config_; }
  std::span<const PairSample> data() const noexcept { return data_; }

  /// Where a checkpoint is written if the loss turns non-finite.
  std::optional<std::filesystem::path> divergence_checkpoint;
  /// Directory for periodic checkpoints (checkpoint_every).
  std::optional<std::filesystem::path> checkpoint_dir;

 private:
  void enter_stage2(std::ostream* log);
  void set_trainable();
  std::vector<std::size_t> batch_indices(std::int64_t iteration) const;

  NetworkConfig net_config_;
  TrainConfig config_;
  std::vector<PairSample> data_;
  Network<float> net_;
  Optimizer opt_;
  std::int64_t iteration_ = 0;
  bool stage2_entered_ = false;
  TrainLog log_;
};

/// Full two-stage schedule; returns the trained weights and the log.
std::pair<Network<float>, TrainLog> train(const NetworkConfig& net_config, std::vector<PairSample> data,
                                          const TrainConfig& config, std::ostream* log = nullptr);

}  // namespace sritm
