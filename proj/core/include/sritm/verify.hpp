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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sritm/metrics.hpp"
#include "sritm/ops.hpp"
#include "sritm/tensor.hpp"

/// Reference implementations and self-check suites used by the CLI.
namespace sritm::verify {

/// Direct nested-loop convolution (stride 1, zero "same" padding).
Tensor<double> naive_conv2d(const Tensor<double>& x, const ConvParams<double>& p);
/// Guided filter computed window by window, without integral images.
Tensor<double> naive_guided_filter(const Tensor<double>& input, const Tensor<double>& guide, int radius,
                                   double eps);
/// Mean SSIM from explicit 11x11 windows.
double naive_ssim(const Plane& a, const Plane& b);

struct GradCheckOptions {
  /// Perturbation is eps_scale * max(1, |theta|).
  double eps_scale = 1e-4;
  /// Denominator floor for the relative error.
  double floor = 1e-6;
  /// Entries checked per tensor; 0 checks every entry.
  std::size_t max_entries = 0;
  std::uint64_t seed = 0;
  /// Stop at the first perturbation that flips a ReLU.
  bool stop_on_kink = false;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst;
  std::size_t checked = 0;
  /// Perturbations that changed the ReLU activation pattern. Finite
  /// differences across a kink are not a valid oracle, so a check is only
  /// conclusive when this is zero.
  std::size_t kink_crossings = 0;
};

/// Compares backward() of `loss()` against central differences for every
/// (or a sampled subset of) entry of `params`. `loss` must rebuild its graph
/// on every call.
GradCheckReport gradcheck(const std::function<Tensor<double>()>& loss,
                          std::span<const std::pair<std::string, Tensor<double>>> params,
                          const GradCheckOptions& options = {});

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CheckResult> paramcount_suite();
std::vector<CheckResult> gradcheck_suite();
std::vector<CheckResult> oracle_suite();

}  // namespace sritm::verify
