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

#include "sritm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sritm/frame_io.hpp"
#include "sritm/keyvalue.hpp"

namespace sritm {

Plane plane_of(const ImageFrame& frame, int channel) {
  Plane p(frame.width, frame.height);
  p.values = frame.planes.at(static_cast<std::size_t>(channel));
  return p;
}

template <typename T>
Plane plane_of(const Tensor<T>& t, std::int64_t n, std::int64_t c) {
  const Shape& s = t.shape();
  Plane p(s.w(), s.h());
  const T* src = t.data().data() + (n * s.c() + c) * s.h() * s.w();
  for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = static_cast<double>(src[i]);
  return p;
}

// ------------------------------------------------------------ PSNR

double psnr(std::span<const double> a, std::span<const double> b, double peak) {
  if (a.size() != b.size()) {
    throw ShapeError("psnr: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " samples");
  }
  if (a.empty()) throw ShapeError("psnr: empty input");
  if (!(peak > 0.0)) throw ConfigError("peak", "must be > 0");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrInfinity;
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr(const ImageFrame& a, const ImageFrame& b, double peak) {
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError("psnr: frames " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                     " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
  }
  std::vector<double> va, vb;
  for (int c = 0; c < 3; ++c) {
    va.insert(va.end(), a.planes[c].begin(), a.planes[c].end());
    vb.insert(vb.end(), b.planes[c].begin(), b.planes[c].end());
  }
  return psnr(std::span<const double>(va), std::span<const double>(vb), peak);
}

template <typename T>
double psnr(const Tensor<T>& a, const Tensor<T>& b, double peak) {
  if (!(a.shape() == b.shape())) throw ShapeError("psnr: " + a.shape().str() + " vs " + b.shape().str());
  std::vector<double> va(a.data().begin(), a.data().end()), vb(b.data().begin(), b.data().end());
  return psnr(std::span<const double>(va), std::span<const double>(vb), peak);
}

// ------------------------------------------------------------ mPSNR

double mpsnr_render(double v, int stop, bool quantize_output) {
  const double e = std::clamp(std::pow(std::ldexp(std::max(v, 0.0), stop), 1.0 / kMpsnrGamma), 0.0, 1.0);
  return quantize_output ? snap(e, kMpsnrBits) : e;
}

double mpsnr(const LuminanceFrame& a, const LuminanceFrame& b, Strictness strictness,
             bool quantize_output) {
  if (a.width != b.width || a.height != b.height) throw ShapeError("mpsnr: frame sizes differ");
  if (strictness == Strictness::kStrict) {
    for (const auto* f : {&a, &b}) {
      for (const auto& plane : f->rgb) {
        if (std::any_of(plane.begin(), plane.end(), [](double v) { return v < 0.0; })) {
          throw NumericError("mpsnr: negative linear input");
        }
      }
    }
  }
  double total = 0.0;
  std::vector<double> ra, rb;
  for (int stop : kMpsnrExposures) {
    ra.clear();
    rb.clear();
    for (int c = 0; c < 3; ++c) {
      for (double v : a.rgb[c]) ra.push_back(mpsnr_render(v, stop, quantize_output));
      for (double v : b.rgb[c]) rb.push_back(mpsnr_render(v, stop, quantize_output));
    }
    total += psnr(std::span<const double>(ra), std::span<const double>(rb), 1.0);
  }
  return total / static_cast<double>(kMpsnrExposures.size());
}

// ------------------------------------------------------------ SSIM

namespace {

std::array<double, SsimConstants::kWindow> gaussian_1d() {
  std::array<double, SsimConstants::kWindow> g{};
  const int half = SsimConstants::kWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < SsimConstants::kWindow; ++i) {
    const double x = i - half;
    g[static_cast<std::size_t>(i)] = std::exp(-(x * x) / (2.0 * SsimConstants::kSigma * SsimConstants::kSigma));
    sum += g[static_cast<std::size_t>(i)];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Valid-mode separable Gaussian filtering.
Plane filter_valid(const Plane& p) {
  const auto g = gaussian_1d();
  const int k = SsimConstants::kWindow;
  const std::int64_t ow = p.width - k + 1, oh = p.height - k + 1;
  Plane rows(ow, p.height);
  for (std::int64_t y = 0; y < p.height; ++y) {
    for (std::int64_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += g[static_cast<std::size_t>(i)] * p.at(y, x + i);
      rows.at(y, x) = acc;
    }
  }
  Plane out(ow, oh);
  for (std::int64_t y = 0; y < oh; ++y) {
    for (std::int64_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += g[static_cast<std::size_t>(i)] * rows.at(y + i, x);
      out.at(y, x) = acc;
    }
  }
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane out(a.width, a.height);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] * b.values[i];
  return out;
}

}  // namespace

std::array<double, 121> ssim_window() {
  const auto g = gaussian_1d();
  std::array<double, 121> w{};
  for (std::size_t y = 0; y < 11; ++y) {
    for (std::size_t x = 0; x < 11; ++x) w[y * 11 + x] = g[y] * g[x];
  }
  return w;
}

SsimTerms ssim_terms(const Plane& a, const Plane& b) {
  if (a.width != b.width || a.height != b.height) throw ShapeError("ssim: plane sizes differ");
  if (a.width < SsimConstants::kWindow || a.height < SsimConstants::kWindow) {
    throw ShapeError("ssim: plane " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                     " is smaller than the 11x11 window");
  }
  const double c1 = std::pow(SsimConstants::kK1 * SsimConstants::kRange, 2);
  const double c2 = std::pow(SsimConstants::kK2 * SsimConstants::kRange, 2);
  const Plane mu_a = filter_valid(a), mu_b = filter_valid(b);
  const Plane e_aa = filter_valid(product(a, a)), e_bb = filter_valid(product(b, b));
  const Plane e_ab = filter_valid(product(a, b));
  double sum_ssim = 0.0, sum_cs = 0.0;
  for (std::size_t i = 0; i < mu_a.values.size(); ++i) {
    const double ma = mu_a.values[i], mb = mu_b.values[i];
    const double var_a = e_aa.values[i] - ma * ma;
    const double var_b = e_bb.values[i] - mb * mb;
    const double cov = e_ab.values[i] - ma * mb;
    const double l = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
    const double cs = (2.0 * cov + c2) / (var_a + var_b + c2);
    sum_ssim += l * cs;
    sum_cs += cs;
  }
  const double count = static_cast<double>(mu_a.values.size());
  return {sum_ssim / count, sum_cs / count};
}

double ssim(const Plane& a, const Plane& b) { return ssim_terms(a, b).ssim; }

Plane downsample2(const Plane& p) {
  Plane out(p.width / 2, p.height / 2);
  for (std::int64_t y = 0; y < out.height; ++y) {
    for (std::int64_t x = 0; x < out.width; ++x) {
      out.at(y, x) = 0.25 * (p.at(2 * y, 2 * x) + p.at(2 * y, 2 * x + 1) + p.at(2 * y + 1, 2 * x) +
                             p.at(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

MsSsimResult ms_ssim(const Plane& a, const Plane& b, Strictness strictness) {
  if (a.width != b.width || a.height != b.height) throw ShapeError("ms_ssim: plane sizes differ");
  const int full = static_cast<int>(kMsSsimWeights.size());
  int scales = 0;
  for (std::int64_t w = a.width, h = a.height; scales < full && std::min(w, h) >= SsimConstants::kWindow;
       w /= 2, h /= 2) {
    ++scales;
  }
  if (scales < full && strictness == Strictness::kStrict) {
    throw ShapeError("ms_ssim: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                     " is too small for 5 scales (needs 176x176)");
  }
  if (scales == 0) throw ShapeError("ms_ssim: plane smaller than the 11x11 window");
  const double total = std::accumulate(kMsSsimWeights.begin(), kMsSsimWeights.end(), 0.0);
  const double used = std::accumulate(kMsSsimWeights.begin(), kMsSsimWeights.begin() + scales, 0.0);
  const double rescale = total / used;

  Plane pa = a, pb = b;
  double value = 1.0;
  for (int s = 0; s < scales; ++s) {
    const SsimTerms t = ssim_terms(pa, pb);
    const double w = kMsSsimWeights[static_cast<std::size_t>(s)] * rescale;
    const double term = s + 1 == scales ? t.ssim : t.cs;
    value *= std::pow(std::max(term, 0.0), w);
    if (s + 1 < scales) {
      pa = downsample2(pa);
      pb = downsample2(pb);
    }
  }
  return {value, scales};
}

// ------------------------------------------------------------ reports

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) return {};
  const auto infinite = std::count_if(values.begin(), values.end(), [](double v) { return std::isinf(v); });
  if (infinite > 0) {
    const bool uniform = infinite == static_cast<std::ptrdiff_t>(values.size()) &&
                         std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; });
    const double mean = std::accumulate(values.begin(), values.end(), 0.0);
    return {mean, uniform ? 0.0 : kPsnrInfinity};
  }
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

Aggregate MetricReport::summary(const std::string& metric) const {
  const auto it = values.find(metric);
  if (it == values.end()) throw ConfigError(metric, "metric not in report");
  return aggregate(it->second);
}

void MetricReport::write_key_values(std::ostream& os) const {
  os << "# per-pair values, mean and population standard deviation (divide by N)\n";
  for (const auto& [note, text] : notes) os << "# " << note << ": " << text << '\n';
  for (const auto& [metric, vals] : values) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
      os << metric << ".pair." << pairs[i] << '=' << format_double(vals[i]) << '\n';
    }
    const Aggregate agg = aggregate(vals);
    os << metric << ".mean=" << format_double(agg.mean) << '\n';
    os << metric << ".std=" << format_double(agg.std) << '\n';
  }
}

void MetricReport::write_table(std::ostream& os) const {
  os << std::left << std::setw(10) << "metric" << std::setw(28) << "mean +/- std (population)"
     << "pairs\n";
  for (const auto& [metric, vals] : values) {
    const Aggregate agg = aggregate(vals);
    std::ostringstream cell;
    cell << std::fixed << std::setprecision(metric.find("ssim") != std::string::npos ? 4 : 2) << agg.mean
         << " +/- " << agg.std;
    os << std::setw(10) << metric << std::setw(28) << cell.str() << vals.size() << '\n';
  }
  for (const auto& [note, text] : notes) os << "note: " << note << ": " << text << '\n';
}

std::set<std::string> parse_metric_list(const std::string& list) {
  static const std::set<std::string> kKnown = {"psnr", "mpsnr", "ssim", "msssim"};
  std::set<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (!kKnown.contains(item)) throw ConfigError("metrics", "unknown metric '" + item + "'");
    out.insert(item);
  }
  if (out.empty()) throw ConfigError("metrics", "no metric selected");
  return out;
}

namespace {

std::vector<std::string> frame_names(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError(dir.string(), "not a directory");
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

MetricReport evaluate_pairs(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                            const EvalConfig& config) {
  const auto pred = frame_names(pred_dir);
  const auto gt = frame_names(gt_dir);
  for (const auto& n : pred) {
    if (!std::binary_search(gt.begin(), gt.end(), n)) {
      throw ConfigError("gt", "'" + n + "' has no counterpart in " + gt_dir.string());
    }
  }
  for (const auto& n : gt) {
    if (!std::binary_search(pred.begin(), pred.end(), n)) {
      throw ConfigError("pred", "'" + n + "' has no counterpart in " + pred_dir.string());
    }
  }
  if (pred.empty()) throw ConfigError("pred", "no frames found in " + pred_dir.string());

  MetricReport report;
  report.pairs.reserve(pred.size());
  for (const auto& name : pred) {
    std::string stem = std::filesystem::path(name).stem().string();
    const ImageFrame p = load_frame(pred_dir / name);
    const ImageFrame g = load_frame(gt_dir / name);
    if (!(p.spec == g.spec)) {
      throw ConfigError("spec", name + ": prediction is " + p.spec.str() + ", ground truth is " + g.spec.str());
    }
    report.pairs.push_back(stem);
    if (config.metrics.contains("psnr")) report.values["psnr"].push_back(psnr(p, g, 1.0));
    if (config.metrics.contains("ssim")) report.values["ssim"].push_back(ssim(plane_of(p, 0), plane_of(g, 0)));
    if (config.metrics.contains("msssim")) {
      const auto r = ms_ssim(plane_of(p, 0), plane_of(g, 0), config.strictness);
      report.values["msssim"].push_back(r.value);
      if (r.scales < static_cast<int>(kMsSsimWeights.size())) {
        report.notes["msssim." + stem] = "used " + std::to_string(r.scales) + " scales";
      }
    }
    if (config.metrics.contains("mpsnr")) {
      report.values["mpsnr"].push_back(
          mpsnr(linearize(p, config.peak_nits), linearize(g, config.peak_nits), config.strictness));
    }
  }
  return report;
}

template Plane plane_of<float>(const Tensor<float>&, std::int64_t, std::int64_t);
template Plane plane_of<double>(const Tensor<double>&, std::int64_t, std::int64_t);
template double psnr<float>(const Tensor<float>&, const Tensor<float>&, double);
template double psnr<double>(const Tensor<double>&, const Tensor<double>&, double);

}  // namespace sritm
