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

#include <fstream>
#include <map>

#include "sritm/error.hpp"
#include "sritm/network.hpp"
#include "sritm/tensor_file.hpp"

namespace sritm {

std::vector<TensorRecord> to_records(const WeightStore<float>& store) {
  std::vector<TensorRecord> out;
  out.reserve(store.size());
  for (const auto& [name, t] : store.entries()) {
    TensorRecord r;
    r.name = name;
    for (int i = 0; i < t.shape().rank(); ++i) r.dims.push_back(static_cast<std::uint32_t>(t.shape()[i]));
    r.values.assign(t.data().begin(), t.data().end());
    out.push_back(std::move(r));
  }
  return out;
}

void assign_records(WeightStore<float>& store, std::span<const TensorRecord> records,
                    const std::string& source) {
  std::map<std::string, const TensorRecord*> by_name;
  for (const auto& r : records) by_name[r.name] = &r;
  for (auto& [name, t] : store.entries()) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw ShapeError(name + ": expected " + t.shape().str() + " but " + source + " has no such tensor");
    }
    std::vector<std::int64_t> dims(it->second->dims.begin(), it->second->dims.end());
    const Shape file_shape{std::span<const std::int64_t>(dims)};
    if (!(file_shape == t.shape())) {
      throw ShapeError(name + ": expected " + t.shape().str() + ", " + source + " has " +
                       file_shape.str());
    }
  }
  for (const auto& r : records) {
    if (!store.contains(r.name)) throw ConfigError(r.name, "unknown tensor in " + source);
  }
  for (auto& [name, t] : store.entries()) {
    const auto& v = by_name.at(name)->values;
    std::copy(v.begin(), v.end(), t.data().begin());
  }
}

void save_weights(const WeightStore<float>& weights, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  ByteWriter w(out);
  const auto records = to_records(weights);
  write_tensor_section(w, records);
  if (!out) throw IoError(path.string(), "write failed");
}

Network<float> load_weights(const std::filesystem::path& path, const NetworkConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  ByteReader r(in, path.string());
  const auto records = read_tensor_section(r);
  Network<float> net = Network<float>::zeros(config);
  assign_records(net.weights(), records, path.string());
  return net;
}

}  // namespace sritm
