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

#include <optional>
#include <string>
#include <vector>

#include "sritm/decomposition.hpp"

namespace sritm {

/// Input arrangements of the reduced network: (a) image only, single pass;
/// (b) image, base and detail stacked into one pass; (c) separate base and
/// detail passes; (d) base and detail passes each stacked with the image;
/// (e) separate image, base and detail passes.
enum class ToyVariant { kA, kB, kC, kD, kE };

/// What feeds the shared-modulation-feature subnet of a pass.
enum class SmfInput { kImage, kLayer, kStacked };

enum class Layer { kImage, kBase, kDetail };

std::string to_string(ToyVariant v);
std::string to_string(SmfInput v);
std::string to_string(Layer v);
ToyVariant parse_toy_variant(const std::string& s);
SmfInput parse_smf_input(const std::string& s);

struct NetworkConfig {
  int sf = 2;
  int m = 3;
  int n = 10;
  int base_channels = 64;
  int pre_shuffle_channels = 256;
  int out_channels = 3;
  bool use_gf = true;
  bool use_skips = true;
  bool use_modulation = true;
  bool toy = false;
  std::optional<ToyVariant> toy_variant;
  SmfInput smf_input = SmfInput::kStacked;
  DecompositionParams decomposition;

  static NetworkConfig full(int sf = 2);
  /// Reduced network: one RB + one modulated block per pass, one fusion
  /// ResBlock and narrow features.
  static NetworkConfig toy_default();

  /// Variant actually built: the explicit toy variant, otherwise (d) with
  /// decomposition and (a) without.
  ToyVariant variant() const;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  /// Sets one `key = value` entry. Returns false for keys this struct does
  /// not own; malformed values throw ConfigError.
  bool set(const std::string& key, const std::string& value);

  /// Canonical key=value lines, parseable by set().
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string fingerprint() const;

  friend bool operator==(const NetworkConfig& a, const NetworkConfig& b) {
    return a.fingerprint() == b.fingerprint();
  }
};

struct PassSpec {
  std::string name;
  std::vector<Layer> input;
  std::vector<Layer> smf_input;
  /// Index of the pass whose features are bridged into this one, or -1.
  int bridge = -1;
};

/// Feature-extraction passes in fusion order.
std::vector<PassSpec> pass_layout(const NetworkConfig& cfg);

}  // namespace sritm
