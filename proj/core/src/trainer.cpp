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

#include "sritm/trainer.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "sritm/error.hpp"
#include "sritm/keyvalue.hpp"
#include "sritm/metrics.hpp"
#include "sritm/tensor_file.hpp"

namespace sritm {

// ------------------------------------------------------------ config

void TrainConfig::validate() const {
  if (stage1_iters < 0) throw ConfigError("stage1_iters", "must be >= 0");
  if (stage2_iters < 0) throw ConfigError("stage2_iters", "must be >= 0");
  if (!(lr_weights > 0.0)) throw ConfigError("lr_weights", "must be > 0");
  if (!(lr_biases > 0.0)) throw ConfigError("lr_biases", "must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
  if (eval_every < 0) throw ConfigError("eval_every", "must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every", "must be >= 0");
}

bool TrainConfig::set(const std::string& key, const std::string& value) {
  if (key == "stage1_iters") stage1_iters = parse_int_value(key, value);
  else if (key == "stage2_iters") stage2_iters = parse_int_value(key, value);
  else if (key == "lr_weights") lr_weights = parse_double_value(key, value);
  else if (key == "lr_biases") lr_biases = parse_double_value(key, value);
  else if (key == "batch_size") batch_size = static_cast<int>(parse_int_value(key, value));
  else if (key == "eval_every") eval_every = parse_int_value(key, value);
  else if (key == "checkpoint_every") checkpoint_every = parse_int_value(key, value);
  else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int_value(key, value));
  else if (key == "max_samples") max_samples = static_cast<std::size_t>(parse_int_value(key, value));
  else return false;
  return true;
}

std::vector<std::pair<std::string, std::string>> TrainConfig::entries() const {
  return {{"stage1_iters", std::to_string(stage1_iters)},
          {"stage2_iters", std::to_string(stage2_iters)},
          {"lr_weights", format_double(lr_weights)},
          {"lr_biases", format_double(lr_biases)},
          {"batch_size", std::to_string(batch_size)},
          {"eval_every", std::to_string(eval_every)},
          {"checkpoint_every", std::to_string(checkpoint_every)},
          {"seed", std::to_string(seed)},
          {"max_samples", std::to_string(max_samples)}};
}

DeskPreset desk_preset() {
  DeskPreset p;
  p.network = NetworkConfig::toy_default();
  p.train.stage1_iters = 500;
  p.train.stage2_iters = 1500;
  p.train.lr_weights = 1e-3;
  p.train.lr_biases = 1e-4;
  p.train.batch_size = 4;
  p.train.max_samples = 4;
  p.data.patch_size = 32;
  p.data.patches_min = 4;
  p.data.patches_max = 4;
  p.frame_size = 64;
  p.frames = 1;
  return p;
}

// ------------------------------------------------------------ steps

Batch collate(std::span<const PairSample> samples, std::span<const std::size_t> indices) {
  if (indices.empty()) throw ShapeError("collate: empty batch");
  const Shape lr0 = samples[indices[0]].lr.shape(), hr0 = samples[indices[0]].hr.shape();
  const auto b = static_cast<std::int64_t>(indices.size());
  Batch batch{Tensor<float>(Shape{b, lr0.c(), lr0.h(), lr0.w()}), Tensor<float>(Shape{b, hr0.c(), hr0.h(), hr0.w()})};
  auto lr = batch.lr.data();
  auto hr = batch.hr.data();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const PairSample& s = samples[indices[k]];
    if (!(s.lr.shape() == lr0) || !(s.hr.shape() == hr0)) {
      throw ShapeError("collate: sample " + std::to_string(indices[k]) + " has shapes " + s.lr.shape().str() +
                       " / " + s.hr.shape().str() + ", expected " + lr0.str() + " / " + hr0.str());
    }
    std::copy(s.lr.data().begin(), s.lr.data().end(), lr.begin() + static_cast<std::ptrdiff_t>(k * lr0.numel()));
    std::copy(s.hr.data().begin(), s.hr.data().end(), hr.begin() + static_cast<std::ptrdiff_t>(k * hr0.numel()));
  }
  return batch;
}

double train_step(Network<float>& net, const Batch& batch, Optimizer& opt) {
  const Tensor<float> pred = net.forward(batch.lr);
  if (!(pred.shape() == batch.hr.shape())) {
    throw ShapeError("train_step: prediction " + pred.shape().str() + " vs target " + batch.hr.shape().str());
  }
  const Tensor<float> loss = mse_loss(pred, batch.hr);
  const double value = loss.item();
  backward(loss);
  std::vector<Tensor<float>> params;
  std::vector<double> lrs;
  params.reserve(opt.params.size());
  for (const auto& name : opt.params) {
    params.push_back(net.weights().at(name));
    lrs.push_back(WeightStore<float>::is_bias(name) ? opt.lr_biases : opt.lr_weights);
  }
  adam_step<float>(params, lrs, opt.adam);
  net.zero_grad();
  return value;
}

double dataset_psnr(const Network<float>& net, std::span<const PairSample> samples) {
  NoGradGuard guard;
  double sq = 0.0;
  std::int64_t count = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::size_t idx[] = {i};
    const Batch b = collate(samples, idx);
    const Tensor<float> pred = net.forward(b.lr);
    for (std::size_t k = 0; k < pred.data().size(); ++k) {
      const double d = static_cast<double>(pred.data()[k]) - static_cast<double>(b.hr.data()[k]);
      sq += d * d;
    }
    count += pred.numel();
  }
  if (count == 0) throw ShapeError("dataset_psnr: no samples");
  const double mse = sq / static_cast<double>(count);
  return mse == 0.0 ? kPsnrInfinity : 10.0 * std::log10(1.0 / mse);
}

// ------------------------------------------------------------ trainer

namespace {

constexpr std::uint64_t kStage2Salt = 0x5ea9e2b0a7d1c3f1ULL;

std::vector<PairSample> prepare(std::vector<PairSample> data, const TrainConfig& config, const NetworkConfig& net) {
  if (config.max_samples > 0 && data.size() > config.max_samples) data.resize(config.max_samples);
  if (data.empty()) throw ConfigError("shards", "no training samples");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Shape& lr = data[i].lr.shape();
    const Shape& hr = data[i].hr.shape();
    if (lr.rank() != 4 || hr.rank() != 4 || lr.h() * net.sf != hr.h() || lr.w() * net.sf != hr.w()) {
      throw ShapeError("sample " + std::to_string(i) + ": " + lr.str() + " -> " + hr.str() +
                       " is not an sf = " + std::to_string(net.sf) + " pair");
    }
  }
  return data;
}

// Integers ride in float tensors as exact 16-bit chunks.
void push_u64(std::vector<float>& out, std::uint64_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<float>((v >> (16 * i)) & 0xffff));
}

std::uint64_t pop_u64(const std::vector<float>& in, std::size_t& pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint64_t>(in.at(pos++)) << (16 * i);
  return v;
}

TensorRecord text_record(const std::string& name, const std::string& text) {
  TensorRecord r{name, {static_cast<std::uint32_t>(text.size())}, {}};
  for (unsigned char c : text) r.values.push_back(static_cast<float>(c));
  return r;
}

std::string record_text(const TensorRecord& r) {
  std::string s;
  for (float f : r.values) s.push_back(static_cast<char>(static_cast<unsigned char>(f)));
  return s;
}

}  // namespace

Trainer::Trainer(NetworkConfig net_config, TrainConfig config, std::vector<PairSample> data)
    : net_config_(std::move(net_config)),
      config_(config),
      data_(prepare(std::move(data), config, net_config_)),
      net_(net_config_, config.seed) {
  config_.validate();
  if (config_.stage1_iters > 0 && net_config_.use_modulation) net_.set_modulation_enabled(false);
  opt_.lr_weights = config_.lr_weights;
  opt_.lr_biases = config_.lr_biases;
  set_trainable();
}

void Trainer::set_trainable() {
  opt_.params.clear();
  for (auto& [name, t] : net_.weights().entries()) {
    const bool trainable = net_.modulation_enabled() || !net_.is_modulation_param(name);
    t.set_requires_grad(trainable);
    if (trainable) opt_.params.push_back(name);
  }
}

std::vector<std::size_t> Trainer::batch_indices(std::int64_t iteration) const {
  const auto it = static_cast<std::uint64_t>(iteration);
  std::seed_seq seq{static_cast<std::uint32_t>(config_.seed), static_cast<std::uint32_t>(config_.seed >> 32),
                    static_cast<std::uint32_t>(it), static_cast<std::uint32_t>(it >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<std::size_t> out(static_cast<std::size_t>(config_.batch_size));
  for (auto& i : out) i = pick(rng);
  return out;
}

void Trainer::enter_stage2(std::ostream* log) {
  stage2_entered_ = true;
  if (net_config_.use_modulation) {
    net_.init_modulation(config_.seed ^ kStage2Salt);
    net_.set_modulation_enabled(true);
  }
  opt_.adam = AdamState<float>{};
  set_trainable();
  log_.stage_boundary = iteration_;
  if (log) *log << "iter=" << iteration_ << " stage=2 event=stage_boundary\n" << std::flush;
}

double Trainer::step(std::ostream* log) {
  if (iteration_ >= config_.stage1_iters && !stage2_entered_) enter_stage2(log);
  const auto idx = batch_indices(iteration_);
  const Batch batch = collate(data_, idx);
  const double loss = train_step(net_, batch, opt_);
  ++iteration_;
  if (!std::isfinite(loss)) {
    if (divergence_checkpoint) save_checkpoint(*divergence_checkpoint);
    throw NumericError("training diverged at iteration " + std::to_string(iteration_) + " (loss " +
                       format_double(loss) + ")");
  }
  TrainLogEntry entry{iteration_, stage2_entered_ ? 2 : 1, loss, std::nullopt};
  if (log) *log << "iter=" << iteration_ << " stage=" << entry.stage << " loss=" << format_double(loss) << '\n';
  if (config_.eval_every > 0 && iteration_ % config_.eval_every == 0) {
    const std::size_t n = std::min<std::size_t>(data_.size(), 16);
    entry.psnr = dataset_psnr(net_, std::span<const PairSample>(data_).first(n));
    if (log) *log << "iter=" << iteration_ << " stage=" << entry.stage << " psnr=" << format_double(*entry.psnr) << '\n';
  }
  log_.entries.push_back(entry);
  if (config_.checkpoint_every > 0 && checkpoint_dir && iteration_ % config_.checkpoint_every == 0) {
    std::ostringstream name;
    name << "checkpoint_" << std::setw(8) << std::setfill('0') << iteration_ << ".ckpt";
    std::filesystem::create_directories(*checkpoint_dir);
    save_checkpoint(*checkpoint_dir / name.str());
  }
  if (log) log->flush();
  return loss;
}

void Trainer::run(std::int64_t until, std::ostream* log) {
  until = std::min(until, config_.total_iters());
  while (iteration_ < until) step(log);
  // A schedule with an empty stage 2 still records its boundary.
  if (iteration_ == config_.total_iters() && iteration_ >= config_.stage1_iters && !stage2_entered_ &&
      config_.stage2_iters == 0) {
    stage2_entered_ = true;
    log_.stage_boundary = iteration_;
  }
}

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  std::vector<TensorRecord> extra;
  std::vector<float> pos;
  push_u64(pos, static_cast<std::uint64_t>(iteration_));
  push_u64(pos, static_cast<std::uint64_t>(opt_.adam.step));
  pos.push_back(stage2_entered_ ? 1.0f : 0.0f);
  pos.push_back(net_.modulation_enabled() ? 1.0f : 0.0f);
  push_u64(pos, static_cast<std::uint64_t>(log_.stage_boundary.value_or(-1) + 1));
  extra.push_back({"meta.position", {static_cast<std::uint32_t>(pos.size())}, pos});
  extra.push_back(text_record("meta.network", net_config_.fingerprint()));
  for (std::size_t i = 0; i < opt_.adam.m.size(); ++i) {
    const auto& name = opt_.params.at(i);
    const Shape& s = net_.weights().at(name).shape();
    std::vector<std::uint32_t> dims;
    for (int d = 0; d < s.rank(); ++d) dims.push_back(static_cast<std::uint32_t>(s[d]));
    extra.push_back({"adam.m." + name, dims, opt_.adam.m[i]});
    extra.push_back({"adam.v." + name, dims, opt_.adam.v[i]});
  }

  std::ostringstream buf(std::ios::binary);
  ByteWriter w(buf);
  write_tensor_section(w, to_records(net_.weights()));
  write_tensor_section(w, extra);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  const std::string bytes = buf.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

Trainer Trainer::resume(const std::filesystem::path& checkpoint, NetworkConfig net_config, TrainConfig config,
                        std::vector<PairSample> data) {
  std::ifstream in(checkpoint, std::ios::binary);
  if (!in) throw IoError(checkpoint.string(), "cannot open");
  ByteReader r(in, checkpoint.string());
  const auto weights = read_tensor_section(r);
  const auto extra = read_tensor_section(r);
  std::map<std::string, const TensorRecord*> meta;
  for (const auto& rec : extra) meta[rec.name] = &rec;
  if (!meta.contains("meta.position") || !meta.contains("meta.network")) {
    throw FormatError(checkpoint.string(), r.offset(), "not a checkpoint (no training state section)");
  }
  const std::string fp = record_text(*meta.at("meta.network"));
  if (fp != net_config.fingerprint()) {
    throw ConfigError("network", "checkpoint was written for a different network configuration (" + fp + ")");
  }

  Trainer t(std::move(net_config), config, std::move(data));
  assign_records(t.net_.weights(), weights, checkpoint.string());
  const auto& pos = meta.at("meta.position")->values;
  std::size_t p = 0;
  t.iteration_ = static_cast<std::int64_t>(pop_u64(pos, p));
  const auto adam_step_count = static_cast<std::int64_t>(pop_u64(pos, p));
  t.stage2_entered_ = pos.at(p++) != 0.0f;
  const bool mod_on = pos.at(p++) != 0.0f;
  const auto boundary = static_cast<std::int64_t>(pop_u64(pos, p)) - 1;
  if (boundary >= 0) t.log_.stage_boundary = boundary;
  t.net_.set_modulation_enabled(mod_on);
  t.set_trainable();
  t.opt_.adam = AdamState<float>{};
  t.opt_.adam.step = adam_step_count;
  if (meta.contains("adam.m." + t.opt_.params.front())) {
    for (const auto& name : t.opt_.params) {
      const auto m = meta.find("adam.m." + name), v = meta.find("adam.v." + name);
      if (m == meta.end() || v == meta.end()) {
        throw FormatError(checkpoint.string(), r.offset(), "missing optimizer moments for " + name);
      }
      t.opt_.adam.m.push_back(m->second->values);
      t.opt_.adam.v.push_back(v->second->values);
    }
  }
  return t;
}

std::pair<Network<float>, TrainLog> train(const NetworkConfig& net_config, std::vector<PairSample> data,
                                          const TrainConfig& config, std::ostream* log) {
  Trainer t(net_config, config, std::move(data));
  t.run_all(log);
  return {t.network(), t.log()};
}

}  // namespace sritm
