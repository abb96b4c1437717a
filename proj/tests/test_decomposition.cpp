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

#include <gtest/gtest.h>

#include <cmath>

#include "sritm/decomposition.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace sritm {
namespace {

using namespace oracle;

using testing::random_tensor;

DecompositionParams params(int r, double eps) {
  DecompositionParams p;
  p.radius = r;
  p.eps = eps;
  return p;
}

Tensor<double> step_image(int h, int w, double lo, double hi) {
  Tensor<double> t(Shape{1, 3, h, w});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) t.at(0, c, y, x) = x < w / 2 ? lo : hi;
  return t;
}

TEST(GuidedFilterTest, MatchesWindowedOracle) {
  const auto img = random_tensor(Shape{1, 3, 8, 8}, 1, 0.0, 1.0);
  const auto fast = guided_filter(img, params(2, 0.01));
  const auto slow = windowed_guided_filter(img, img, 2, 0.01);
  for (std::size_t i = 0; i < fast.data().size(); ++i) EXPECT_NEAR(fast.data()[i], slow.data()[i], 1e-6);
}

TEST(GuidedFilterTest, MatchesOracleAcrossSizesAndGuides) {
  for (auto [h, w, r] : {std::tuple{5, 11, 1}, std::tuple{16, 9, 3}, std::tuple{12, 12, 5}}) {
    const auto p = random_tensor(Shape{2, 2, h, w}, 10 + r, 0.0, 1.0);
    const auto g = random_tensor(Shape{2, 2, h, w}, 20 + r, 0.0, 1.0);
    const auto fast = guided_filter(p, g, params(r, 0.02));
    const auto slow = windowed_guided_filter(p, g, r, 0.02);
    for (std::size_t i = 0; i < fast.data().size(); ++i) ASSERT_NEAR(fast.data()[i], slow.data()[i], 1e-6);
  }
}

TEST(GuidedFilterTest, ConstantImageUnchanged) {
  const Tensor<double> img(Shape{1, 3, 9, 7}, 0.42);
  for (int r : {1, 3, 5}) {
    const auto out = guided_filter(img, params(r, 0.001));
    for (double v : out.data()) EXPECT_NEAR(v, 0.42, 1e-12);
  }
}

TEST(GuidedFilterTest, LargeEpsApproachesBoxMean) {
  const auto img = random_tensor(Shape{1, 1, 8, 8}, 3, 0.0, 1.0);
  const auto out = guided_filter(img, params(1, 1e9));
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double sum = 0, k = 0;
      for (int yy = std::max(0, y - 1); yy <= std::min(7, y + 1); ++yy)
        for (int xx = std::max(0, x - 1); xx <= std::min(7, x + 1); ++xx) {
          sum += img.at(0, 0, yy, xx);
          k += 1;
        }
      // mean of box means around (y, x): a is ~0 so output is mean_b.
      double mb = 0, kk = 0;
      for (int yy = std::max(0, y - 1); yy <= std::min(7, y + 1); ++yy)
        for (int xx = std::max(0, x - 1); xx <= std::min(7, x + 1); ++xx) {
          double s2 = 0, k2 = 0;
          for (int y3 = std::max(0, yy - 1); y3 <= std::min(7, yy + 1); ++y3)
            for (int x3 = std::max(0, xx - 1); x3 <= std::min(7, xx + 1); ++x3) {
              s2 += img.at(0, 0, y3, x3);
              k2 += 1;
            }
          mb += s2 / k2;
          kk += 1;
        }
      EXPECT_NEAR(out.at(0, 0, y, x), mb / kk, 1e-6);
    }
}

TEST(GuidedFilterTest, PreservesStrongEdges) {
  const auto img = step_image(16, 32, 0.2, 0.7);
  const auto out = guided_filter(img, params(5, 0.01));
  const double step = out.at(0, 0, 8, 16) - out.at(0, 0, 8, 15);
  // A box mean of the same radius would leave a step of about 0.05.
  EXPECT_GE(step, 0.6 * 0.5);
}

TEST(GuidedFilterTest, DoesNotIncreaseTotalVariation) {
  const auto row = random_tensor(Shape{1, 1, 1, 32}, 7, 0.0, 1.0);
  Tensor<double> img(Shape{1, 1, 6, 32});
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 32; ++x) img.at(0, 0, y, x) = row.at(0, 0, 0, x);
  const auto out = guided_filter(img, params(2, 0.05));
  auto tv = [](const Tensor<double>& t) {
    double s = 0;
    for (int x = 1; x < 32; ++x) s += std::abs(t.at(0, 0, 0, x) - t.at(0, 0, 0, x - 1));
    return s;
  };
  EXPECT_LE(tv(out), tv(img));
}

TEST(GuidedFilterTest, ShapeMismatchAndBadParams) {
  EXPECT_THROW(guided_filter(Tensor<double>(Shape{1, 3, 4, 4}), Tensor<double>(Shape{1, 3, 4, 5}), params(1, 0.1)),
               ShapeError);
  EXPECT_THROW(params(0, 0.1).validate(), ConfigError);
  EXPECT_THROW(params(2, 0.0).validate(), ConfigError);
}

TEST(DecomposeTest, ConstantImageIdentitiesAreExact) {
  const Tensor<float> img(Shape{1, 3, 8, 8}, 0.6f);
  const auto d = decompose(img, DecompositionParams{});
  for (std::size_t i = 0; i < img.data().size(); ++i) {
    EXPECT_EQ(d.base.data()[i], 0.6f);
    EXPECT_EQ(d.detail.data()[i], 1.0f);
  }
}

TEST(DecomposeTest, RecomposeIdentity) {
  const auto img = random_tensor(Shape{1, 3, 16, 16}, 5, 0.05, 1.0);
  const auto d = decompose(img, DecompositionParams{});
  double min_base = 1.0;
  for (double b : d.base.data()) min_base = std::min(min_base, b);
  ASSERT_GT(min_base, kDivFloor);
  const auto back = mul(d.base, d.detail);
  for (std::size_t i = 0; i < img.data().size(); ++i) EXPECT_NEAR(back.data()[i], img.data()[i], 1e-6);
}

TEST(DecomposeTest, StepEdgeDetailCarriesEdge) {
  const auto img = step_image(12, 24, 0.1, 0.8);
  const auto d = decompose(img, params(3, 0.01));
  const auto oracle = windowed_guided_filter(img, img, 3, 0.01);
  for (std::size_t i = 0; i < img.data().size(); ++i) ASSERT_NEAR(d.base.data()[i], oracle.data()[i], 1e-6);
  EXPECT_NE(d.detail.at(0, 0, 6, 11), 1.0);
  EXPECT_NE(d.detail.at(0, 0, 6, 12), 1.0);
  EXPECT_NEAR(d.detail.at(0, 0, 6, 0), 1.0, 1e-6);
}

TEST(DecomposeTest, BlackPixelsHitTheFloor) {
  const Tensor<double> img(Shape{1, 3, 4, 4}, 0.0);
  const auto d = decompose(img, DecompositionParams{});
  for (double v : d.detail.data()) EXPECT_EQ(v, 0.0);
}

TEST(MakeInputsTest, LayoutIsBitExact) {
  const auto img = random_tensor(Shape{1, 3, 6, 6}, 8, 0.1, 1.0);
  const auto d = decompose(img, DecompositionParams{});
  const auto in = make_inputs(img, d.base, d.detail);
  EXPECT_EQ(in.base_in.shape(), (Shape{1, 6, 6, 6}));
  EXPECT_EQ(in.detail_in.shape(), (Shape{1, 6, 6, 6}));
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 6; ++x) {
        EXPECT_EQ(in.base_in.at(0, c, y, x), img.at(0, c, y, x));
        EXPECT_EQ(in.detail_in.at(0, c, y, x), img.at(0, c, y, x));
        EXPECT_EQ(in.base_in.at(0, c + 3, y, x), d.base.at(0, c, y, x));
        EXPECT_EQ(in.detail_in.at(0, c + 3, y, x), d.detail.at(0, c, y, x));
      }
  EXPECT_THROW(make_inputs(img, d.base, Tensor<double>(Shape{1, 3, 6, 5})), ShapeError);
}

}  // namespace
}  // namespace sritm
