// Copyright 2026 The B-EED Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "beed/errors.hpp"
#include "beed/image.hpp"
#include "beed/ppm.hpp"
#include "oracles.hpp"

namespace beed {
namespace {

RgbImage solid(int w, int h, double r, double g, double b) {
  return {{PixelPlane(w, h, r), PixelPlane(w, h, g), PixelPlane(w, h, b)}};
}

TEST(Colour, GreyIsNeutral) {
  const auto ycc = rgb_to_ycbcr(solid(4, 3, 128, 128, 128));
  for (const auto& p : ycc.channels)
    for (double v : p.samples) EXPECT_NEAR(v, 128.0, 1e-12);
}

TEST(Colour, PureRedByHand) {
  const auto ycc = rgb_to_ycbcr(solid(1, 1, 255, 0, 0));
  // 0.299 * 255 and 128 + (255 - 76.245) * 0.713
  EXPECT_NEAR(ycc.y().samples[0], 76.245, 1e-9);
  EXPECT_NEAR(ycc.cr().samples[0], 255.452315, 1e-9);
  EXPECT_NEAR(ycc.cb().samples[0], 128.0 - 76.245 * 0.564, 1e-9);
  EXPECT_EQ(quantize_sample(ycc.cr().samples[0]), 255);
}

TEST(Colour, RoundTripRandom) {
  std::mt19937_64 rng(7);
  RgbImage img{{testing::random_plane(rng, 100, 100), testing::random_plane(rng, 100, 100),
                testing::random_plane(rng, 100, 100)}};
  const auto back = ycbcr_to_rgb(rgb_to_ycbcr(img));
  double worst = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < img.channels[c].size(); ++i)
      worst = std::max(worst, std::abs(back.channels[c].samples[i] - img.channels[c].samples[i]));
  EXPECT_LE(worst, 0.002);
}

TEST(Colour, ShapeMismatchRejected) {
  RgbImage img{{PixelPlane(2, 2), PixelPlane(2, 2), PixelPlane(3, 2)}};
  EXPECT_THROW(rgb_to_ycbcr(img), InvalidArgument);
}

TEST(Psnr, IdenticalIsSentinel) {
  const auto a = solid(5, 5, 10, 20, 30);
  EXPECT_FALSE(psnr(a, a).has_value());
}

TEST(Psnr, UnitDifference) {
  const auto a = solid(5, 5, 10, 20, 30);
  const auto b = solid(5, 5, 11, 21, 31);
  EXPECT_NEAR(*psnr(a, b), 48.130803608679106, 1e-9);
}

TEST(Psnr, MatchesReferenceMse) {
  std::mt19937_64 rng(3);
  const auto a = testing::random_plane(rng, 16, 16);
  const auto b = testing::random_plane(rng, 16, 16);
  const double ref = 10.0 * std::log10(255.0 * 255.0 / testing::reference_mse({&a}, {&b}));
  EXPECT_NEAR(*psnr(std::span(&a, 1), std::span(&b, 1)), ref, 1e-9);
}

TEST(Psnr, SymmetricAndMonotone) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    auto a = testing::random_plane(rng, 9, 7);
    auto b = testing::random_plane(rng, 9, 7);
    const double ab = *psnr(std::span(&a, 1), std::span(&b, 1));
    EXPECT_EQ(ab, *psnr(std::span(&b, 1), std::span(&a, 1)));
    const std::size_t i = rng() % b.size();
    const double d = b.samples[i] - a.samples[i];
    b.samples[i] = a.samples[i] + d + (d >= 0 ? 1.0 : -1.0);
    EXPECT_LT(*psnr(std::span(&a, 1), std::span(&b, 1)), ab);
  }
}

TEST(Blocks, WholePlaneIsBlockZero) {
  std::mt19937_64 rng(1);
  const auto p = testing::random_plane(rng, 8, 8);
  const BlockGrid g(8, 8);
  const Tile t = block_extract(p, g, 0);
  for (int i = 0; i < 64; ++i) EXPECT_EQ(t[i], p.samples[i]);
}

TEST(Blocks, PartialBlockReplicatesEdge) {
  PixelPlane p(12, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 12; ++x) p.at(x, y) = 100 * y + x;
  const BlockGrid g(12, 8);
  ASSERT_EQ(g.count(), 2);
  const Tile t = block_extract(p, g, 1);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) EXPECT_EQ(t[y * 8 + x], p.at(std::min(8 + x, 11), y));
}

TEST(Blocks, ExtractPlaceIdentity) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const int w = 1 + static_cast<int>(rng() % 40), h = 1 + static_cast<int>(rng() % 40);
    const auto p = testing::random_plane(rng, w, h);
    const BlockGrid g(w, h);
    PixelPlane q(w, h, -1.0);
    for (int k = 0; k < g.count(); ++k) block_place(q, g, k, block_extract(p, g, k));
    EXPECT_EQ(q, p);
  }
}

TEST(Blocks, PixelMaskCountsRealPixels) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 30; ++t) {
    const int w = 1 + static_cast<int>(rng() % 50), h = 1 + static_cast<int>(rng() % 50);
    const BlockGrid g(w, h);
    BlockMask m(g, false);
    std::size_t expect = 0;
    for (int k = 0; k < g.count(); ++k) {
      if (rng() % 2) {
        m.set_kept(k, true);
        const auto r = g.rect(k);
        expect += static_cast<std::size_t>(r.w) * r.h;
      }
    }
    const PixelMask pm = m.pixel_mask();
    EXPECT_EQ(pm.count(), expect);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) EXPECT_EQ(pm.at(x, y), m.kept((y / 8) * g.nx() + x / 8));
  }
}

TEST(Blocks, DensityBounds) {
  const BlockGrid g(20, 20);
  BlockMask m(g, true);
  EXPECT_EQ(m.density(), 1.0);
  m.set_kept(3, false);
  EXPECT_LT(m.density(), 1.0);
  EXPECT_EQ(BlockMask(g, false).density(), 0.0);
  EXPECT_EQ(BlockMask::from_bits(g, m.bits()), m);
}

TEST(Pnm, RoundTrip) {
  std::mt19937_64 rng(2);
  RgbImage img;
  for (auto& c : img.channels) {
    c = testing::random_plane(rng, 13, 5);
    for (double& v : c.samples) v = std::round(v);
  }
  const auto back = decode_pnm(encode_ppm(img));
  EXPECT_FALSE(back.grey);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(back.rgb.channels[c], img.channels[c]);
}

TEST(Pnm, GreyIsReplicated) {
  PixelPlane p(3, 2, 42.0);
  const auto back = decode_pnm(encode_pgm(p));
  EXPECT_TRUE(back.grey);
  for (const auto& c : back.rgb.channels) EXPECT_EQ(c, p);
}

TEST(Pnm, MalformedRejected) {
  const std::string bad = "P3\n1 1\n255\n0 0 0\n";
  EXPECT_THROW(decode_pnm(std::span(reinterpret_cast<const std::uint8_t*>(bad.data()), bad.size())),
               FormatError);
  const std::string trunc = "P6\n2 2\n255\n\x01\x02";
  EXPECT_THROW(
      decode_pnm(std::span(reinterpret_cast<const std::uint8_t*>(trunc.data()), trunc.size())),
      FormatError);
}

}  // namespace
}  // namespace beed
