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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sritm/colorimetry.hpp"
#include "sritm/dataset.hpp"
#include "sritm/decomposition.hpp"
#include "sritm/error.hpp"
#include "sritm/frame_io.hpp"
#include "sritm/keyvalue.hpp"
#include "sritm/metrics.hpp"
#include "sritm/network.hpp"
#include "sritm/runtime.hpp"
#include "sritm/trainer.hpp"
#include "sritm/verify.hpp"

namespace fs = std::filesystem;

namespace sritm::cli {
namespace {

// Everything a config file may set. Keys are shared by every subcommand so
// one file can drive the whole pipeline.
struct Settings {
  NetworkConfig net = NetworkConfig::full(2);
  TrainConfig train;
  DatasetSpec data;
  int frame_size = 192;
  int frames = 1;

  static Settings desk() {
    const DeskPreset p = desk_preset();
    Settings s;
    s.net = p.network;
    s.train = p.train;
    s.data = p.data;
    s.frame_size = p.frame_size;
    s.frames = p.frames;
    return s;
  }

  void apply(const std::string& key, const std::string& value) {
    if (key == "sf") {
      net.set(key, value);
      data.sf = net.sf;
    } else if (key == "frame_size") {
      frame_size = static_cast<int>(parse_int_value(key, value));
    } else if (key == "frames") {
      frames = static_cast<int>(parse_int_value(key, value));
    } else if (!net.set(key, value) && !train.set(key, value) && !data.set(key, value)) {
      throw ConfigError(key, "unknown configuration key '" + key + "'");
    }
  }
};

struct ConfigOptions {
  std::string file;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigOptions& opts) {
  cmd->add_option("--config", opts.file, "key = value configuration file");
  cmd->add_option("--set", opts.overrides, "key=value override, applied after --config")->take_all();
}

void load_settings(Settings& s, const ConfigOptions& opts) {
  if (!opts.file.empty()) {
    if (!fs::exists(opts.file)) throw IoError(opts.file, "configuration file not found");
    for (const KeyValue& kv : read_key_value_file(opts.file)) s.apply(kv.key, kv.value);
  }
  for (const std::string& o : opts.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("set", "expected key=value, got '" + o + "'");
    s.apply(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
}

void log_entries(std::ostream& err, const std::vector<std::pair<std::string, std::string>>& entries) {
  for (const auto& [k, v] : entries) err << "config " << k << " = " << v << '\n';
}

void write_entries(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream f(path);
  if (!f) throw IoError(path.string(), "cannot write");
  for (const auto& [k, v] : entries) f << k << " = " << v << '\n';
}

std::vector<std::pair<std::string, std::string>> data_entries(const DatasetSpec& d) {
  return {{"patch_size", std::to_string(d.patch_size)},   {"patches_min", std::to_string(d.patches_min)},
          {"patches_max", std::to_string(d.patches_max)}, {"stride_min", std::to_string(d.stride_min)},
          {"stride_max", std::to_string(d.stride_max)},   {"dataset_seed", std::to_string(d.seed)}};
}

fs::path config_sidecar(const fs::path& weights) { return fs::path(weights.string() + ".cfg"); }

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// ------------------------------------------------------------ decompose

struct DecomposeArgs {
  std::string input, out_base, out_detail;
  DecompositionParams params;
  bool verify = false;
};

int cmd_decompose(const DecomposeArgs& a, std::ostream& out, std::ostream& err) {
  a.params.validate();
  err << "config gf_radius = " << a.params.radius << "\nconfig gf_eps = " << format_double(a.params.eps) << '\n';
  const ImageFrame frame = load_frame(a.input);
  const Tensor<double> image = frame_to_tensor<double>(frame);
  const Decomposition<double> d = decompose(image, a.params);

  ColorimetrySpec spec = frame.spec;
  spec.bit_depth = 16;
  ensure_parent(a.out_base);
  ensure_parent(a.out_detail);
  save_frame(tensor_to_frame(d.base, spec), a.out_base, "base");
  Tensor<double> half(d.detail.shape());
  std::transform(d.detail.data().begin(), d.detail.data().end(), half.data().begin(),
                 [](double v) { return v / 2.0; });
  save_frame(tensor_to_frame(half, spec), a.out_detail, "detail_half");
  out << "base: " << a.out_base << "\ndetail (stored as d/2): " << a.out_detail << '\n';

  if (a.verify) {
    double worst = 0.0;
    std::size_t skipped = 0;
    const auto b = d.base.data(), dd = d.detail.data(), img = image.data();
    for (std::size_t i = 0; i < img.size(); ++i) {
      if (b[i] <= a.params.div_floor) {
        ++skipped;
        continue;
      }
      worst = std::max(worst, std::abs(b[i] * dd[i] - img[i]));
    }
    out << "verify: max |base * detail - input| = " << worst << " (" << skipped
        << " samples at the divisor floor skipped)\n";
    if (!(worst <= 1e-6)) {
      err << "verify failed: recomposition error above 1e-6\n";
      return kExitFailure;
    }
  }
  return kExitOk;
}

// ------------------------------------------------------------ infer

struct InferArgs {
  std::string weights, input, output, dump_dir;
  ConfigOptions config;
};

ImageFrame map_to_frame(const Tensor<float>& map) {
  const Shape& s = map.shape();
  const auto hw = static_cast<std::size_t>(s.h() * s.w());
  std::vector<double> mean(hw, 0.0);
  const auto d = map.data();
  for (std::int64_t c = 0; c < s.c(); ++c)
    for (std::size_t i = 0; i < hw; ++i) mean[i] += d[static_cast<std::size_t>(c) * hw + i];
  const auto [lo, hi] = std::minmax_element(mean.begin(), mean.end());
  const double l = *lo, range = *hi - *lo;
  ImageFrame f(static_cast<int>(s.w()), static_cast<int>(s.h()),
               ColorimetrySpec{Primaries::kBT709, Transfer::kLinear, ColorMatrix::kIdentity, 16, Range::kFull});
  for (std::size_t i = 0; i < hw; ++i) {
    const double v = range > 0.0 ? (mean[i] - l) / range : 0.5;
    for (auto& plane : f.planes) plane[i] = v;
  }
  return f;
}

int cmd_infer(const InferArgs& a, std::ostream& out, std::ostream& err) {
  Settings s;
  ConfigOptions cfg = a.config;
  if (cfg.file.empty() && fs::exists(config_sidecar(a.weights))) cfg.file = config_sidecar(a.weights).string();
  load_settings(s, cfg);
  s.net.validate();
  log_entries(err, s.net.entries());

  const Network<float> net = load_weights(a.weights, s.net);
  const ImageFrame frame = load_frame(a.input);
  if (!(frame.spec == ColorimetrySpec::sdr())) {
    err << "warning: input is " << frame.spec.str() << ", expected " << ColorimetrySpec::sdr().str() << '\n';
  }
  const Tensor<float> lr = frame_to_tensor<float>(frame);
  Tensor<float> hr;
  {
    NoGradGuard guard;
    hr = net.forward(lr);
  }
  ensure_parent(a.output);
  save_frame(tensor_to_frame(hr, ColorimetrySpec::hdr()), a.output);
  out << "output: " << a.output << " (" << hr.shape().w() << "x" << hr.shape().h() << ")\n";

  if (!a.dump_dir.empty()) {
    fs::create_directories(a.dump_dir);
    for (const auto& [name, map] : extract_modulation_maps(net, lr)) {
      const fs::path p = fs::path(a.dump_dir) / (name + ".ppm");
      save_frame(map_to_frame(map), p, "modulation_map");
      out << "modulation map: " << p.string() << '\n';
    }
  }
  return kExitOk;
}

// ------------------------------------------------------------ train

struct TrainArgs {
  std::string preset = "desk";
  std::string shards, out_dir, resume;
  std::int64_t stop_after = 0;
  ConfigOptions config;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  Settings s = a.preset == "desk" ? Settings::desk() : Settings{};
  load_settings(s, a.config);
  s.net.validate();
  s.train.validate();
  s.data.validate();
  log_entries(err, s.net.entries());
  log_entries(err, s.train.entries());

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  std::vector<PairSample> data;
  if (!a.shards.empty()) {
    data = read_shards(a.shards);
  } else {
    log_entries(err, data_entries(s.data));
    const DatasetSummary sum = make_synthetic_dataset(s.frames, s.frame_size, s.data, dir / "shards");
    out << "synthesized " << sum.samples << " samples from " << sum.frames << " frame(s)\n";
    data = read_shards(dir / "shards");
  }

  Trainer trainer = a.resume.empty() ? Trainer(s.net, s.train, std::move(data))
                                     : Trainer::resume(a.resume, s.net, s.train, std::move(data));
  trainer.divergence_checkpoint = dir / "divergence.ckpt";
  if (s.train.checkpoint_every > 0) {
    fs::create_directories(dir / "checkpoints");
    trainer.checkpoint_dir = dir / "checkpoints";
  }
  auto net_entries = s.net.entries(), train_entries = s.train.entries();
  net_entries.insert(net_entries.end(), train_entries.begin(), train_entries.end());
  write_entries(dir / "train.cfg", net_entries);

  std::ofstream log(dir / "train.log", a.resume.empty() ? std::ios::trunc : std::ios::app);
  if (!log) throw IoError((dir / "train.log").string(), "cannot write");
  const std::int64_t total = s.train.total_iters();
  const std::int64_t until = a.stop_after > 0 ? std::min(a.stop_after, total) : total;
  trainer.run(until, &log);

  if (trainer.iteration() < total) {
    trainer.save_checkpoint(dir / "last.ckpt");
    out << "stopped at iteration " << trainer.iteration() << "; checkpoint " << (dir / "last.ckpt").string() << '\n';
    return kExitOk;
  }
  const fs::path weights = dir / "weights.bin";
  save_weights(trainer.network().weights(), weights);
  write_entries(config_sidecar(weights), s.net.entries());
  trainer.save_checkpoint(dir / "final.ckpt");
  out << "weights: " << weights.string() << '\n';
  if (!trainer.log().entries.empty()) out << "final loss: " << trainer.log().entries.back().loss << '\n';
  out << "training PSNR: " << dataset_psnr(trainer.network(), trainer.data()) << " dB\n";
  return kExitOk;
}

// ------------------------------------------------------------ eval

struct EvalArgs {
  std::string pred, gt, metrics = "psnr,mpsnr,ssim,msssim", report;
  double peak_nits = kDefaultPeakNits;
  bool strict = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  EvalConfig cfg;
  cfg.metrics = parse_metric_list(a.metrics);
  cfg.peak_nits = a.peak_nits;
  cfg.strictness = a.strict ? Strictness::kStrict : Strictness::kPermissive;
  err << "config metrics = " << a.metrics << "\nconfig peak_nits = " << format_double(a.peak_nits) << '\n';
  const MetricReport report = evaluate_pairs(a.pred, a.gt, cfg);
  report.write_table(out);
  if (!a.report.empty()) {
    ensure_parent(a.report);
    std::ofstream f(a.report);
    if (!f) throw IoError(a.report, "cannot write");
    report.write_key_values(f);
  }
  return kExitOk;
}

// ------------------------------------------------------------ convert

struct ConvertArgs {
  std::string input, output, to;
  double peak_nits = kDefaultPeakNits;
};

int cmd_convert(const ConvertArgs& a, std::ostream& out, std::ostream& err) {
  ColorimetrySpec target;
  if (a.to == "pq2020") target = ColorimetrySpec::hdr();
  else if (a.to == "gamma709") target = ColorimetrySpec::sdr();
  else throw ConfigError("to", "unsupported target '" + a.to + "' (expected pq2020 or gamma709)");
  err << "config to = " << a.to << "\nconfig peak_nits = " << format_double(a.peak_nits) << '\n';

  std::string content;
  const ImageFrame frame = load_frame(a.input, Strictness::kStrict, &content);
  ensure_parent(a.output);
  if (frame.spec == target) {
    fs::copy_file(a.input, a.output, fs::copy_options::overwrite_existing);
    fs::copy_file(sidecar_path(a.input), sidecar_path(a.output), fs::copy_options::overwrite_existing);
    out << "already " << target.str() << "; copied\n";
    return kExitOk;
  }
  ConversionStats stats;
  const ImageFrame converted = encode_frame(linearize(frame, a.peak_nits), target, kSdrWhiteNits, &stats);
  save_frame(converted, a.output, content.empty() ? "image" : content);
  if (stats.negative_clamped > 0 || stats.overrange_clamped > 0) {
    err << "warning: clamped " << stats.negative_clamped << " negative (out-of-gamut) and "
        << stats.overrange_clamped << " over-range components\n";
  }
  out << frame.spec.str() << " -> " << target.str() << ": " << a.output << '\n';
  return kExitOk;
}

// ------------------------------------------------------------ selfcheck

int cmd_selfcheck(const std::string& suite, std::ostream& out) {
  std::vector<verify::CheckResult> results;
  if (suite == "paramcount" || suite == "all") {
    auto r = verify::paramcount_suite();
    results.insert(results.end(), r.begin(), r.end());
  }
  if (suite == "oracles" || suite == "all") {
    auto r = verify::oracle_suite();
    results.insert(results.end(), r.begin(), r.end());
  }
  if (suite == "gradcheck" || suite == "all") {
    auto r = verify::gradcheck_suite();
    results.insert(results.end(), r.begin(), r.end());
  }
  bool ok = true;
  for (const auto& r : results) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.pass;
  }
  out << (ok ? "all checks passed" : "some checks failed") << '\n';
  return ok ? kExitOk : kExitFailure;
}

// ------------------------------------------------------------ make-dataset

struct DatasetArgs {
  std::optional<int> synthetic;
  std::string frames_dir, out_dir;
  std::optional<int> sf;
  std::optional<std::uint64_t> seed;
  std::optional<int> frame_size;
  ConfigOptions config;
};

int cmd_make_dataset(const DatasetArgs& a, std::ostream& out, std::ostream& err) {
  Settings s;
  load_settings(s, a.config);
  if (a.sf) s.apply("sf", std::to_string(*a.sf));
  if (a.seed) s.data.seed = *a.seed;
  if (a.frame_size) s.frame_size = *a.frame_size;
  s.data.validate();
  log_entries(err, data_entries(s.data));
  err << "config sf = " << s.data.sf << '\n';

  const DatasetSummary sum = a.synthetic ? make_synthetic_dataset(*a.synthetic, s.frame_size, s.data, a.out_dir)
                                         : make_frames_dataset(a.frames_dir, s.data, a.out_dir);
  out << "frames: " << sum.frames << "\nsamples: " << sum.samples << "\nshards: " << sum.shards.size() << '\n';
  return kExitOk;
}

// ------------------------------------------------------------ init-weights

struct InitArgs {
  std::string out;
  bool zero = false;
  std::uint64_t seed = 0;
  ConfigOptions config;
};

int cmd_init_weights(const InitArgs& a, std::ostream& out, std::ostream& err) {
  Settings s;
  load_settings(s, a.config);
  s.net.validate();
  log_entries(err, s.net.entries());
  const Network<float> net = a.zero ? Network<float>::zeros(s.net) : Network<float>(s.net, a.seed);
  ensure_parent(a.out);
  save_weights(net.weights(), a.out);
  write_entries(config_sidecar(a.out), s.net.entries());
  out << "weights: " << a.out << " (" << net.param_count() << " parameters)\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint super-resolution and inverse tone-mapping toolkit", "sritm"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "Split a frame into guided-filter base and detail layers");
  c_dec->add_option("--input", dec.input)->required();
  c_dec->add_option("--out-base", dec.out_base)->required();
  c_dec->add_option("--out-detail", dec.out_detail)->required();
  c_dec->add_option("--radius", dec.params.radius);
  c_dec->add_option("--eps", dec.params.eps);
  c_dec->add_flag("--verify", dec.verify, "Check base * detail against the input");

  InferArgs inf;
  auto* c_inf = app.add_subcommand("infer", "Upscale an SDR frame to an HDR frame");
  c_inf->add_option("--weights", inf.weights)->required();
  c_inf->add_option("--input", inf.input)->required();
  c_inf->add_option("--output", inf.output)->required();
  c_inf->add_option("--dump-modulation-maps", inf.dump_dir, "Directory for per-block modulation maps");
  add_config_options(c_inf, inf.config);

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Two-stage training");
  c_tr->add_option("--out", tr.out_dir)->required();
  c_tr->add_option("--shards", tr.shards, "Shard file or directory (default: synthesize)");
  c_tr->add_option("--preset", tr.preset)->check(CLI::IsMember({"desk", "full"}));
  c_tr->add_option("--resume", tr.resume, "Checkpoint to continue from");
  c_tr->add_option("--stop-after", tr.stop_after, "Stop at this iteration and write a checkpoint");
  add_config_options(c_tr, tr.config);

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Compare predicted and reference frames");
  c_ev->add_option("--pred", ev.pred)->required();
  c_ev->add_option("--gt", ev.gt)->required();
  c_ev->add_option("--metrics", ev.metrics);
  c_ev->add_option("--report", ev.report, "key=value report file");
  c_ev->add_option("--peak-nits", ev.peak_nits);
  c_ev->add_flag("--strict", ev.strict);

  ConvertArgs cv;
  auto* c_cv = app.add_subcommand("convert", "Convert between display formats");
  c_cv->add_option("--input", cv.input)->required();
  c_cv->add_option("--output", cv.output)->required();
  c_cv->add_option("--to", cv.to)->required();
  c_cv->add_option("--peak-nits", cv.peak_nits);

  std::string suite = "all";
  auto* c_sc = app.add_subcommand("selfcheck", "Run built-in verification suites");
  c_sc->add_option("--suite", suite)->check(CLI::IsMember({"gradcheck", "paramcount", "oracles", "all"}));

  DatasetArgs ds;
  auto* c_ds = app.add_subcommand("make-dataset", "Write training shards");
  auto* o_syn = c_ds->add_option("--synthetic", ds.synthetic, "Number of procedural frames");
  auto* o_frm = c_ds->add_option("--frames", ds.frames_dir, "Directory with hdr/ and sdr/ frames");
  o_syn->excludes(o_frm);
  c_ds->add_option("--out", ds.out_dir)->required();
  c_ds->add_option("--sf", ds.sf);
  c_ds->add_option("--seed", ds.seed);
  c_ds->add_option("--frame-size", ds.frame_size);
  add_config_options(c_ds, ds.config);

  InitArgs in;
  auto* c_in = app.add_subcommand("init-weights", "Write an initialized weight file");
  c_in->add_option("--out", in.out)->required();
  c_in->add_flag("--zero", in.zero);
  c_in->add_option("--seed", in.seed);
  add_config_options(c_in, in.config);

  std::vector<const char*> argv{"sritm"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (c_ds->parsed() && !ds.synthetic && ds.frames_dir.empty()) {
      throw CLI::RequiredError("--synthetic or --frames");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  init_threads_from_env();
  try {
    if (c_dec->parsed()) return cmd_decompose(dec, out, err);
    if (c_inf->parsed()) return cmd_infer(inf, out, err);
    if (c_tr->parsed()) return cmd_train(tr, out, err);
    if (c_ev->parsed()) return cmd_eval(ev, out, err);
    if (c_cv->parsed()) return cmd_convert(cv, out, err);
    if (c_sc->parsed()) return cmd_selfcheck(suite, out);
    if (c_ds->parsed()) return cmd_make_dataset(ds, out, err);
    if (c_in->parsed()) return cmd_init_weights(in, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace sritm::cli
