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

namespace sritm {

/// Upper bound on worker threads used inside numeric kernels. Initialized
/// from the SRITM_THREADS environment variable on first use (default 1).
int num_threads();
void set_num_threads(int n);

/// When enabled, every tensor operation verifies that its output is finite
/// and throws NumericError otherwise.
bool check_finite_enabled();
void set_check_finite(bool enabled);

/// Activation-pattern probe for the calling thread. While active, relu
/// folds the on/off pattern of each input it sees into a running hash, so two
/// forward passes with equal hashes took the same branch at every kink.
void relu_probe_begin();
std::uint64_t relu_probe_end();
bool relu_probe_active();
void relu_probe_mix(std::uint64_t value);

/// Reads SRITM_THREADS and applies it. Returns the resulting thread count.
int init_threads_from_env();

}  // namespace sritm
