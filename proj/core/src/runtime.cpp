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

#include "sritm/runtime.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include <Eigen/Core>

#ifdef SRITM_HAVE_OPENMP
#include <omp.h>
#endif

namespace sritm {
namespace {

std::atomic<int> g_threads{0};
std::atomic<bool> g_check_finite{false};
thread_local bool t_probe_active = false;
thread_local std::uint64_t t_probe_hash = 0;

void apply(int n) {
  g_threads.store(n);
  Eigen::setNbThreads(n);
#ifdef SRITM_HAVE_OPENMP
  omp_set_num_threads(n);
#endif
}

}  // namespace

int init_threads_from_env() {
  int n = 1;
  if (const char* env = std::getenv("SRITM_THREADS")) {
    try {
      n = std::stoi(env);
    } catch (...) {
      n = 1;
    }
  }
  if (n < 1) n = 1;
  apply(n);
  return n;
}

int num_threads() {
  int n = g_threads.load();
  return n > 0 ? n : init_threads_from_env();
}

void set_num_threads(int n) { apply(n < 1 ? 1 : n); }

bool check_finite_enabled() { return g_check_finite.load(); }
void set_check_finite(bool enabled) { g_check_finite.store(enabled); }

void relu_probe_begin() {
  t_probe_active = true;
  t_probe_hash = 0xcbf29ce484222325ULL;
}

std::uint64_t relu_probe_end() {
  t_probe_active = false;
  return t_probe_hash;
}

bool relu_probe_active() { return t_probe_active; }

void relu_probe_mix(std::uint64_t value) {
  t_probe_hash = (t_probe_hash ^ value) * 0x100000001b3ULL;
}

}  // namespace sritm
