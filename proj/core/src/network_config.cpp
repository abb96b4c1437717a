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

#include "sritm/network_config.hpp"

#include <algorithm>
#include <sstream>

#include "sritm/error.hpp"
#include "sritm/keyvalue.hpp"

namespace sritm {

std::string to_string(ToyVariant v) {
  switch (v) {
    case ToyVariant::kA: return "a";
    case ToyVariant::kB: return "b";
    case ToyVariant::kC: return "c";
    case ToyVariant::kD: return "d";
    case ToyVariant::kE: return "e";
  }
  return "?";
}

std::string to_string(SmfInput v) {
  switch (v) {
    case SmfInput::kImage: return "image";
    case SmfInput::kLayer: return "layer";
    case SmfInput::kStacked: return "stacked";
  }
  return "?";
}

std::string to_string(Layer v) {
  switch (v) {
    case Layer::kImage: return "image";
    case Layer::kBase: return "base";
    case Layer::kDetail: return "detail";
  }
  return "?";
}

ToyVariant parse_toy_variant(const std::string& s) {
  if (s == "a") return ToyVariant::kA;
  if (s == "b") return ToyVariant::kB;
  if (s == "c") return ToyVariant::kC;
  if (s == "d") return ToyVariant::kD;
  if (s == "e") return ToyVariant::kE;
  throw ConfigError("toy_variant", "expected one of a|b|c|d|e, got '" + s + "'");
}

SmfInput parse_smf_input(const std::string& s) {
  if (s == "image") return SmfInput::kImage;
  if (s == "layer") return SmfInput::kLayer;
  if (s == "stacked") return SmfInput::kStacked;
  throw ConfigError("smf_input", "expected image|layer|stacked, got '" + s + "'");
}

NetworkConfig NetworkConfig::full(int sf) {
  NetworkConfig c;
  c.sf = sf;
  return c;
}

NetworkConfig NetworkConfig::toy_default() {
  NetworkConfig c;
  c.toy = true;
  c.m = 1;
  c.n = 1;
  c.base_channels = 16;
  c.pre_shuffle_channels = 64;
  return c;
}

ToyVariant NetworkConfig::variant() const {
  if (toy_variant) return *toy_variant;
  return use_gf ? ToyVariant::kD : ToyVariant::kA;
}

void NetworkConfig::validate() const {
  if (sf != 2 && sf != 4) throw ConfigError("sf", "must be 2 or 4, got " + std::to_string(sf));
  if (m < 1) throw ConfigError("m", "must be >= 1");
  if (n < 0) throw ConfigError("n", "must be >= 0");
  if (base_channels < 1) throw ConfigError("base_channels", "must be >= 1");
  if (pre_shuffle_channels < 4 || pre_shuffle_channels % 4 != 0) {
    throw ConfigError("pre_shuffle_channels", "must be a positive multiple of 4");
  }
  if (out_channels != 3) throw ConfigError("out_channels", "the global residual needs 3 channels");
  if (toy_variant && !toy) throw ConfigError("toy_variant", "only valid with toy = true");
  const ToyVariant v = variant();
  if (v != ToyVariant::kA && !use_gf) {
    throw ConfigError("use_gf", "variant (" + to_string(v) + ") consumes base/detail layers");
  }
  if (v == ToyVariant::kA && use_gf && toy_variant) {
    throw ConfigError("use_gf", "variant (a) takes the image only; set use_gf = false");
  }
  if (use_skips && (v == ToyVariant::kA || v == ToyVariant::kB)) {
    throw ConfigError("use_skips", "skip connections need separate base and detail passes");
  }
  decomposition.validate();
}

bool NetworkConfig::set(const std::string& key, const std::string& value) {
  auto as_int = [&] { return static_cast<int>(parse_int_value(key, value)); };
  if (key == "sf") sf = as_int();
  else if (key == "m") m = as_int();
  else if (key == "n") n = as_int();
  else if (key == "base_channels") base_channels = as_int();
  else if (key == "pre_shuffle_channels") pre_shuffle_channels = as_int();
  else if (key == "out_channels") out_channels = as_int();
  else if (key == "use_gf") use_gf = parse_bool_value(key, value);
  else if (key == "use_skips") use_skips = parse_bool_value(key, value);
  else if (key == "use_modulation") use_modulation = parse_bool_value(key, value);
  else if (key == "toy") toy = parse_bool_value(key, value);
  else if (key == "toy_variant") {
    if (value == "none" || value.empty()) toy_variant.reset();
    else toy_variant = parse_toy_variant(value);
  } else if (key == "smf_input") smf_input = parse_smf_input(value);
  else if (key == "gf_radius") decomposition.radius = as_int();
  else if (key == "gf_eps") decomposition.eps = parse_double_value(key, value);
  else if (key == "div_floor") decomposition.div_floor = parse_double_value(key, value);
  else return false;
  return true;
}

std::vector<std::pair<std::string, std::string>> NetworkConfig::entries() const {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"sf", std::to_string(sf)},
      {"m", std::to_string(m)},
      {"n", std::to_string(n)},
      {"base_channels", std::to_string(base_channels)},
      {"pre_shuffle_channels", std::to_string(pre_shuffle_channels)},
      {"out_channels", std::to_string(out_channels)},
      {"use_gf", b(use_gf)},
      {"use_skips", b(use_skips)},
      {"use_modulation", b(use_modulation)},
      {"toy", b(toy)},
      {"toy_variant", toy_variant ? to_string(*toy_variant) : "none"},
      {"smf_input", to_string(smf_input)},
      {"gf_radius", std::to_string(decomposition.radius)},
      {"gf_eps", format_double(decomposition.eps)},
      {"div_floor", format_double(decomposition.div_floor)},
  };
}

std::string NetworkConfig::fingerprint() const {
  std::ostringstream os;
  for (const auto& [k, v] : entries()) os << k << '=' << v << ';';
  return os.str();
}

namespace {

std::vector<Layer> smf_layers(SmfInput mode, const std::vector<Layer>& own) {
  switch (mode) {
    case SmfInput::kImage: return {Layer::kImage};
    case SmfInput::kLayer: return own;
    case SmfInput::kStacked: {
      std::vector<Layer> out{Layer::kImage};
      for (Layer l : own) {
        if (l != Layer::kImage) out.push_back(l);
      }
      return out;
    }
  }
  return own;
}

}  // namespace

std::vector<PassSpec> pass_layout(const NetworkConfig& cfg) {
  using L = Layer;
  struct Raw {
    const char* name;
    std::vector<Layer> input;
    std::vector<Layer> own;
    int bridge;
  };
  std::vector<Raw> raw;
  switch (cfg.variant()) {
    case ToyVariant::kA: raw = {{"image", {L::kImage}, {L::kImage}, -1}}; break;
    case ToyVariant::kB:
      raw = {{"stack", {L::kImage, L::kBase, L::kDetail}, {L::kBase, L::kDetail}, -1}};
      break;
    case ToyVariant::kC:
      raw = {{"base", {L::kBase}, {L::kBase}, -1}, {"detail", {L::kDetail}, {L::kDetail}, 0}};
      break;
    case ToyVariant::kD:
      raw = {{"base", {L::kImage, L::kBase}, {L::kBase}, -1},
             {"detail", {L::kImage, L::kDetail}, {L::kDetail}, 0}};
      break;
    case ToyVariant::kE:
      raw = {{"image", {L::kImage}, {L::kImage}, -1},
             {"base", {L::kBase}, {L::kBase}, -1},
             {"detail", {L::kDetail}, {L::kDetail}, 1}};
      break;
  }
  std::vector<PassSpec> out;
  for (const auto& r : raw) {
    out.push_back({r.name, r.input, smf_layers(cfg.smf_input, r.own), cfg.use_skips ? r.bridge : -1});
  }
  return out;
}

}  // namespace sritm
