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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sritm {

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// whitespace around keys and values is trimmed. A line without '=' throws
/// ConfigError naming the offending line.
std::vector<KeyValue> parse_key_values(std::string_view text, const std::string& source);
std::vector<KeyValue> read_key_value_file(const std::filesystem::path& path);

/// Last-wins map view; throws ConfigError on a repeated key when
/// `reject_duplicates` is set.
std::map<std::string, std::string> to_map(const std::vector<KeyValue>& kvs,
                                          bool reject_duplicates = true);

std::string trim(std::string_view s);

/// Typed value parsers; malformed text throws ConfigError naming `key`.
long long parse_int_value(const std::string& key, const std::string& value);
double parse_double_value(const std::string& key, const std::string& value);
/// Accepts true/false, 1/0, yes/no, on/off.
bool parse_bool_value(const std::string& key, const std::string& value);
std::string format_double(double v);

}  // namespace sritm
