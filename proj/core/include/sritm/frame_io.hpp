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
#include <string>
#include <string_view>

#include "sritm/colorimetry.hpp"
#include "sritm/error.hpp"

namespace sritm {

/// Frames are stored as a 16-bit binary PPM (P6, maxval 65535) holding the
/// three planes interleaved, plus a text sidecar `<stem>.meta`:
///
///   width=, height=, bit_depth=, primaries=bt709|bt2020,
///   transfer=gamma24|pq|hlg|linear, matrix=bt709|bt2020ncl|identity,
///   range=full, and optionally content=<tag> describing what the planes hold.
///
/// Samples are stored as round(v * 65535) and snapped back to the declared
/// bit depth on load, so 8- and 10-bit content roundtrips bit-exactly.
std::filesystem::path sidecar_path(const std::filesystem::path& raster);

void save_frame(const ImageFrame& frame, const std::filesystem::path& path,
                std::string_view content = "image");

/// Unknown sidecar keys throw ConfigError in strict mode and are ignored in
/// permissive mode. A missing sidecar throws IoError carrying its path.
ImageFrame load_frame(const std::filesystem::path& path,
                      Strictness strictness = Strictness::kStrict,
                      std::string* content = nullptr);

}  // namespace sritm
