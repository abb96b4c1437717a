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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "sritm/colorimetry.hpp"
#include "sritm/frame_io.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace sritm {
namespace {

using namespace oracle;

TEST(TransferTest, PqPeakIsExactlyOne) {
  EXPECT_EQ(pq_encode(1.0), 1.0);
  EXPECT_EQ(apply_transfer(1.0, Transfer::kPQ, Direction::kEncode, kPqMaxNits), 1.0);
  EXPECT_EQ(apply_transfer(10.0, Transfer::kPQ, Direction::kEncode, 1000.0), 1.0);
}

TEST(TransferTest, PqAtHundredNits) {
  EXPECT_NEAR(pq_encode(0.01), pq_reference(100.0), 1e-12);
  EXPECT_NEAR(pq_encode(0.01), 0.5081, 1e-4);
}

TEST(TransferTest, InversePairs) {
  for (int i = 0; i <= 40; ++i) {
    const double l = std::pow(10.0, -4.0 + i * 0.1);
    const double pq = apply_transfer(apply_transfer(l, Transfer::kPQ, Direction::kEncode, 1000.0), Transfer::kPQ,
                                     Direction::kDecode, 1000.0);
    EXPECT_LT(std::abs(pq - l) / l, 1e-6) << l;
    EXPECT_LT(std::abs(gamma24_decode(gamma24_encode(l)) - l) / l, 1e-9) << l;
    EXPECT_LT(std::abs(hlg_decode(hlg_encode(l)) - l) / l, 1e-7) << l;
  }
}

TEST(TransferTest, StrictlyMonotone) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> grid(500);
  for (double& v : grid) v = u(rng);
  std::sort(grid.begin(), grid.end());
  for (Transfer t : {Transfer::kGamma24, Transfer::kPQ, Transfer::kHLG}) {
    for (Direction d : {Direction::kEncode, Direction::kDecode}) {
      double prev = -1.0;
      for (double v : grid) {
        const double y = apply_transfer(v, t, d, kPqMaxNits);
        EXPECT_GT(y, prev);
        prev = y;
      }
    }
  }
}

TEST(TransferTest, NegativeInputPolicy) {
  EXPECT_EQ(apply_transfer(-0.5, Transfer::kPQ, Direction::kEncode), pq_encode(0.0));
  EXPECT_THROW(apply_transfer(-0.5, Transfer::kPQ, Direction::kEncode, kDefaultPeakNits, Strictness::kStrict),
               NumericError);
}

TEST(GamutTest, MatchesChromaticityDerivation) {
  const M3 want = mul3(inverse(kNpm2020), kNpm709);
  const Matrix3 got = gamut_matrix(Primaries::kBT709, Primaries::kBT2020);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(got[i][j], want[i][j], 1e-12);
  EXPECT_NEAR(got[0][0], 0.6274, 5e-5);
  EXPECT_NEAR(got[0][1], 0.3293, 5e-5);
  EXPECT_NEAR(got[0][2], 0.0433, 5e-5);
}

TEST(GamutTest, PairIsIdentityAndRowsSumToOne) {
  const Matrix3 f = gamut_matrix(Primaries::kBT709, Primaries::kBT2020);
  const Matrix3 b = gamut_matrix(Primaries::kBT2020, Primaries::kBT709);
  const Matrix3 id = multiply(b, f);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(id[i][j], i == j ? 1.0 : 0.0, 1e-10);
    EXPECT_NEAR(f[i][0] + f[i][1] + f[i][2], 1.0, 1e-10);
    EXPECT_NEAR(b[i][0] + b[i][1] + b[i][2], 1.0, 1e-10);
  }
}

TEST(GamutTest, SamePrimariesUntouched) {
  std::array<std::vector<double>, 3> rgb{{{0.1, 0.7}, {0.3, 0.2}, {0.9, 1e-7}}};
  const auto before = rgb;
  gamut_convert(rgb, Primaries::kBT2020, Primaries::kBT2020);
  EXPECT_EQ(rgb, before);
}

TEST(YCbCrTest, GrayRedAndRoundtrip) {
  std::array<std::vector<double>, 3> gray{{{0.3}, {0.3}, {0.3}}};
  ycbcr_from_rgb(gray, ColorMatrix::kBT2020NCL);
  EXPECT_NEAR(gray[0][0], 0.3, 1e-15);
  EXPECT_NEAR(gray[1][0], 0.5, 1e-15);
  EXPECT_NEAR(gray[2][0], 0.5, 1e-15);

  std::array<std::vector<double>, 3> red{{{1.0}, {0.0}, {0.0}}};
  ycbcr_from_rgb(red, ColorMatrix::kBT709);
  EXPECT_NEAR(red[0][0], 0.2126, 1e-15);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<std::vector<double>, 3> rgb;
  for (auto& p : rgb) {
    p.resize(256);
    for (double& v : p) v = u(rng);
  }
  for (ColorMatrix m : {ColorMatrix::kBT709, ColorMatrix::kBT2020NCL}) {
    auto x = rgb;
    ycbcr_from_rgb(x, m);
    rgb_from_ycbcr(x, m);
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < 256; ++i) ASSERT_NEAR(x[c][i], rgb[c][i], 1e-6);
  }
}

TEST(QuantizeTest, CodesAndHalfStep) {
  EXPECT_EQ(quantize(1.0, 10), 1023u);
  EXPECT_EQ(quantize(0.5, 8), 128u);
  EXPECT_EQ(quantize(-0.2, 8), 0u);
  EXPECT_EQ(quantize(1.7, 8), 255u);
  for (int i = 0; i <= 1000; ++i) {
    const double v = i / 1000.0;
    EXPECT_LE(std::abs(snap(v, 10) - v), 1.0 / 2046.0 + 1e-15);
  }
}

TEST(PipelineTest, SdrBlackIsZeroLight) {
  ImageFrame f(1, 1, ColorimetrySpec::sdr());
  f.planes[0][0] = 0.0;
  f.planes[1][0] = 0.5;
  f.planes[2][0] = 0.5;
  const auto lum = sdr_to_linear(f);
  for (const auto& p : lum.rgb) EXPECT_EQ(p[0], 0.0);
}

TEST(PipelineTest, SdrWhiteLandsOnPqCode520) {
  ImageFrame f(1, 1, ColorimetrySpec::sdr());
  f.planes[0][0] = 1.0;
  f.planes[1][0] = 0.5;
  f.planes[2][0] = 0.5;
  const ImageFrame h = hdr_encode(sdr_to_linear(f, kDefaultPeakNits, 100.0, Primaries::kBT2020));
  EXPECT_EQ(quantize(h.planes[0][0], 10), static_cast<std::uint32_t>(std::lround(pq_reference(100.0) * 1023)));
  EXPECT_EQ(quantize(h.planes[0][0], 10), 520u);
  EXPECT_NEAR(h.planes[1][0], 512.0 / 1023.0, 1e-12);
}

TEST(PipelineTest, MonotoneInDiffuseWhite) {
  ImageFrame f(1, 1, ColorimetrySpec::sdr());
  f.planes[0][0] = 0.6;
  f.planes[1][0] = 0.45;
  f.planes[2][0] = 0.55;
  double prev = -1.0;
  for (double white : {50.0, 100.0, 200.0, 400.0}) {
    const ImageFrame h = hdr_encode(sdr_to_linear(f, kDefaultPeakNits, white, Primaries::kBT2020));
    EXPECT_GE(h.planes[0][0], prev);
    prev = h.planes[0][0];
  }
}

TEST(PipelineTest, OutOfGamutIsCountedAndClamped) {
  LuminanceFrame lum(1, 1, Primaries::kBT2020);
  lum.rgb[0][0] = 0.0;
  lum.rgb[1][0] = 0.5;
  lum.rgb[2][0] = 0.0;
  ConversionStats stats;
  const ImageFrame sdr = encode_frame(lum, ColorimetrySpec::sdr(), kSdrWhiteNits, &stats);
  EXPECT_GT(stats.negative_clamped, 0u);
  for (const auto& p : sdr.planes) EXPECT_TRUE(p[0] >= 0.0 && p[0] <= 1.0);
}

class FrameIoTest : public ::testing::Test {
 protected:
  testing::TempDir dir{"frame"};
};

TEST_F(FrameIoTest, TenBitRoundtripAndStorageScale) {
  ImageFrame f(3, 2, ColorimetrySpec::hdr());
  std::mt19937 rng(4);
  for (auto& p : f.planes)
    for (double& v : p) v = dequantize(rng() % 1024, 10);
  f.planes[0][0] = 1.0;
  const auto path = dir / "f.ppm";
  save_frame(f, path);
  std::ifstream raw(path, std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  raw >> magic >> w >> h >> maxval;
  raw.get();
  unsigned char hi = 0, lo = 0;
  raw.read(reinterpret_cast<char*>(&hi), 1);
  raw.read(reinterpret_cast<char*>(&lo), 1);
  EXPECT_EQ(magic, "P6");
  EXPECT_EQ(maxval, 65535);
  EXPECT_EQ(hi * 256 + lo, 65535);

  const ImageFrame g = load_frame(path);
  EXPECT_EQ(g.spec, f.spec);
  EXPECT_EQ(g.planes, f.planes);
  EXPECT_EQ(quantize(g.planes[0][0], 10), 1023u);
}

TEST_F(FrameIoTest, EightBitRoundtrip) {
  ImageFrame f(4, 4, ColorimetrySpec::sdr());
  for (auto& p : f.planes)
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = dequantize(static_cast<std::uint32_t>(i * 17 % 256), 8);
  save_frame(f, dir / "s.ppm");
  EXPECT_EQ(load_frame(dir / "s.ppm").planes, f.planes);
}

TEST_F(FrameIoTest, SidecarErrors) {
  ImageFrame f(2, 2, ColorimetrySpec::sdr());
  save_frame(f, dir / "a.ppm");
  {
    std::ofstream meta(dir / "a.meta", std::ios::app);
    meta << "gamma_hint=2.2\n";
  }
  try {
    load_frame(dir / "a.ppm");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "gamma_hint");
  }
  EXPECT_NO_THROW(load_frame(dir / "a.ppm", Strictness::kPermissive));

  save_frame(f, dir / "b.ppm");
  std::filesystem::remove(dir / "b.meta");
  try {
    load_frame(dir / "b.ppm");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(e.path().find("b.meta"), std::string::npos);
  }
}

}  // namespace
}  // namespace sritm
