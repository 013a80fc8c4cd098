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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "beed/codec.hpp"
#include "beed/errors.hpp"
#include "beed/golden_section.hpp"
#include "beed/mask_opt.hpp"
#include "beed/ppm.hpp"
#include "oracles.hpp"

namespace beed {
namespace {

RgbImage crop(const RgbImage& img, int x0, int y0, int w, int h) {
  RgbImage out;
  for (int c = 0; c < 3; ++c) {
    out.channels[c] = PixelPlane(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.channels[c].at(x, y) = img.channels[c].at(x0 + x, y0 + y);
  }
  return out;
}

const RgbImage& small_image() {
  static const RgbImage img = crop(read_pnm(BEED_TEST_DATA_DIR "/coffee.ppm").rgb, 150, 90, 60, 44);
  return img;
}

// Large enough that the fixed JPEG header overhead allows ratios above 20:1.
const RgbImage& mid_image() {
  static const RgbImage img = crop(read_pnm(BEED_TEST_DATA_DIR "/coffee.ppm").rgb, 120, 60, 128, 96);
  return img;
}

struct Fixture {
  YCbCrImage orig;
  YCbCrImage init;
  Fixture(int q = 50) : orig(rgb_to_ycbcr(small_image())), init(baseline_planes(orig, q)) {}
};

TEST(BlockError, ZeroWhenEqual) {
  std::mt19937_64 rng(1);
  const auto p = testing::random_plane(rng, 20, 12);
  const BlockGrid g(20, 12);
  for (int k = 0; k < g.count(); ++k)
    EXPECT_EQ(block_local_error(std::span(&p, 1), std::span(&p, 1), g, k), 0.0);
}

TEST(BlockError, SinglePixelOffBySixteen) {
  PixelPlane a(16, 8, 50.0);
  PixelPlane b = a;
  b.at(10, 3) += 16.0;
  const BlockGrid g(16, 8);
  EXPECT_EQ(block_local_error(std::span(&b, 1), std::span(&a, 1), g, 1), 4.0);
  EXPECT_EQ(block_local_error(std::span(&b, 1), std::span(&a, 1), g, 0), 0.0);
}

TEST(BlockError, MatchesReferenceIncludingPartialBlocks) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const int w = 1 + static_cast<int>(rng() % 30), h = 1 + static_cast<int>(rng() % 30);
    YCbCrImage a, b;
    for (int c = 0; c < 3; ++c) {
      a.channels[c] = testing::random_plane(rng, w, h);
      b.channels[c] = testing::random_plane(rng, w, h);
    }
    const BlockGrid g(w, h);
    for (int k = 0; k < g.count(); ++k) {
      const auto r = g.rect(k);
      auto sub = [&](const PixelPlane& p) {
        PixelPlane s(r.w, r.h);
        for (int y = 0; y < r.h; ++y)
          for (int x = 0; x < r.w; ++x) s.at(x, y) = p.at(r.x0 + x, r.y0 + y);
        return s;
      };
      const auto ay = sub(a.y()), by = sub(b.y());
      const auto acb = sub(a.cb()), bcb = sub(b.cb()), acr = sub(a.cr()), bcr = sub(b.cr());
      const double ly = testing::reference_mse({&ay}, {&by});
      const double lc = testing::reference_mse({&acb, &acr}, {&bcb, &bcr});
      EXPECT_NEAR(block_local_error(a, b, g, k, ChannelGroup::kLuma), ly, 1e-12 * ly);
      EXPECT_NEAR(block_local_error(a, b, g, k, ChannelGroup::kChroma), lc, 1e-12 * lc);
    }
  }
}

TEST(Sparsify, FullDensityIsNoOp) {
  const Fixture f;
  SparsifyConfig cfg;
  cfg.target_density = 1.0;
  const auto m = sparsify(f.init, f.orig, cfg, kStandardParams, kStandardParams,
                          ChannelGroup::kLuma);
  EXPECT_EQ(m, BlockMask(BlockGrid(60, 44), true));
}

TEST(Sparsify, TinyImageTerminates) {
  const auto rgb = crop(small_image(), 0, 0, 16, 16);
  const auto orig = rgb_to_ycbcr(rgb);
  const auto init = baseline_planes(orig, 50);
  for (double target : {0.75, 0.5, 0.25}) {
    SparsifyConfig cfg{0.05, 0.5, target, 3};
    const auto m = sparsify(init, orig, cfg, kStandardParams, kStandardParams,
                            ChannelGroup::kLuma);
    EXPECT_EQ(m.kept_count(), static_cast<int>(target * 4));
  }
}

TEST(Sparsify, DensityBelowOneBlockRejected) {
  const Fixture f;
  SparsifyConfig cfg;
  cfg.target_density = 0.001;
  EXPECT_THROW(sparsify(f.init, f.orig, cfg, kStandardParams, kStandardParams,
                        ChannelGroup::kLuma),
               InvalidArgument);
  cfg.target_density = 0.5;
  cfg.c_ps = 1.0;
  EXPECT_THROW(validate(cfg), InvalidArgument);
}

TEST(Sparsify, PathIsMonotoneAndMatchesDirectCalls) {
  const Fixture f;
  auto model = std::make_shared<GroupModel>(f.init, f.orig, ChannelGroup::kLuma,
                                            kStandardParams, f.init.y());
  SparsifyConfig cfg;
  cfg.seed = 5;
  SparsificationPath path(model, cfg);
  const int n = path.blocks();
  int prev = n;
  for (int kept = n - 1; kept >= 3; kept -= 7) {
    const int rounds = path.rounds();
    path.extend_to(kept);
    const int now = n - static_cast<int>(path.removal_order().size());
    EXPECT_LE(now, kept);
    EXPECT_LE(now, prev);
    if (path.rounds() > rounds) EXPECT_LT(now, prev);
    prev = now;
  }
  // Removal order has no duplicates.
  auto order = path.removal_order();
  std::sort(order.begin(), order.end());
  EXPECT_EQ(std::adjacent_find(order.begin(), order.end()), order.end());

  for (int kept : {n / 2, n / 4}) {
    SparsifyConfig direct = cfg;
    direct.target_density = static_cast<double>(kept) / n;
    EXPECT_EQ(path.mask_at(kept), sparsify(f.init, f.orig, direct, kStandardParams,
                                           kStandardParams, ChannelGroup::kLuma));
  }
}

TEST(Sparsify, DeterministicPerSeed) {
  const Fixture f;
  SparsifyConfig cfg{0.1, 0.5, 0.3, 11};
  const auto a = sparsify(f.init, f.orig, cfg, kStandardParams, kStandardParams,
                          ChannelGroup::kChroma);
  const auto b = sparsify(f.init, f.orig, cfg, kStandardParams, kStandardParams,
                          ChannelGroup::kChroma);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.kept_count(), kept_for_density(0.3, a.size()));
}

TEST(Nlbe, SafeAndDensityConserving) {
  const Fixture f;
  SparsifyConfig sc{0.1, 0.5, 0.25, 2};
  const auto mask = sparsify(f.init, f.orig, sc, kStandardParams, kStandardParams,
                             ChannelGroup::kLuma);
  const GroupModel model(f.init, f.orig, ChannelGroup::kLuma, kStandardParams, f.init.y());
  NLBEConfig cfg;
  cfg.max_cycles = 40;
  const auto r = nlbe(mask, model, cfg);
  EXPECT_EQ(r.mask.kept_count(), mask.kept_count());
  EXPECT_LE(r.final_mse, r.initial_mse);
  EXPECT_EQ(r.initial_mse, model.mse(model.reconstruct(mask)));
  EXPECT_EQ(r.final_mse, model.mse(model.reconstruct(r.mask)));
  EXPECT_EQ(static_cast<int>(r.accepted_mse.size()), r.accepted);
  double prev = r.initial_mse;
  for (double e : r.accepted_mse) {
    EXPECT_LT(e, prev);
    prev = e;
  }
  EXPECT_LE(r.cycles, cfg.max_cycles);
}

TEST(Nlbe, VetoedCandidatesLeaveMaskUnchanged) {
  const Fixture f;
  SparsifyConfig sc{0.1, 0.5, 0.3, 2};
  const auto mask = sparsify(f.init, f.orig, sc, kStandardParams, kStandardParams,
                             ChannelGroup::kLuma);
  const GroupModel model(f.init, f.orig, ChannelGroup::kLuma, kStandardParams, f.init.y());
  NLBEConfig cfg;
  cfg.patience = 5;
  const auto r = nlbe(mask, model, cfg, [](const BlockMask&) { return false; });
  EXPECT_EQ(r.mask, mask);
  EXPECT_EQ(r.accepted, 0);
  EXPECT_EQ(r.cycles, 5);
}

TEST(Nlbe, NeedsRemovedAndKeptBlocks) {
  const Fixture f;
  const GroupModel model(f.init, f.orig, ChannelGroup::kLuma, kStandardParams, f.init.y());
  const BlockGrid g(60, 44);
  EXPECT_THROW(nlbe(BlockMask(g, true), model, {}), InvalidArgument);
  EXPECT_THROW(nlbe(BlockMask(g, false), model, {}), InvalidArgument);
}

TEST(Nlbe, SmallestFractionsStillExchangeOneBlock) {
  const Fixture f;
  SparsifyConfig sc{0.1, 0.5, 0.5, 4};
  const auto mask = sparsify(f.init, f.orig, sc, kStandardParams, kStandardParams,
                             ChannelGroup::kLuma);
  const GroupModel model(f.init, f.orig, ChannelGroup::kLuma, kStandardParams, f.init.y());
  NLBEConfig cfg{1e-6, 1e-6, 30, 30, 1};
  int checked = 0;
  const auto r = nlbe(mask, model, cfg, [&](const BlockMask& m) {
    int diff = 0;
    for (int k = 0; k < m.size(); ++k) diff += m.kept(k) != mask.kept(k);
    EXPECT_LE(diff, 2 + 2 * checked);
    ++checked;
    return true;
  });
  EXPECT_EQ(checked, r.cycles);
  EXPECT_EQ(r.mask.kept_count(), mask.kept_count());
}

TEST(Golden, Parabola) {
  const auto r = golden_section([](double x) { return (x - 2) * (x - 2); }, 0.0, 5.0, 20);
  EXPECT_NEAR(r.argmin, 2.0, 1e-3);
  EXPECT_EQ(r.trace.size(), 20u);
}

TEST(Golden, AbsoluteValueAtPi) {
  const auto r = golden_section([](double x) { return std::abs(x - std::numbers::pi); }, 0.0,
                                4.0, 25);
  EXPECT_NEAR(r.argmin, std::numbers::pi, 1e-3);
}

TEST(Golden, ConstantIsDeterministicMidpoint) {
  const auto a = golden_section([](double) { return 1.0; }, -1.0, 3.0, 10);
  const auto b = golden_section([](double) { return 1.0; }, -1.0, 3.0, 10);
  EXPECT_EQ(a.argmin, b.argmin);
  EXPECT_EQ(a.argmin, 0.5 * (a.lo + a.hi));
  EXPECT_GE(a.argmin, -1.0);
  EXPECT_LE(a.argmin, 3.0);
}

TEST(Golden, BadArguments) {
  auto f = [](double x) { return x; };
  EXPECT_THROW(golden_section(f, 1.0, 1.0, 10), InvalidArgument);
  EXPECT_THROW(golden_section(f, 0.0, 1.0, 3), InvalidArgument);
  EXPECT_THROW(golden_section(f, 0.0, INFINITY, 10), InvalidArgument);
}

TEST(ParamSearch, FindsSyntheticMinimum) {
  ParamSearchConfig cfg;
  cfg.sigma_evals = 12;
  cfg.lambda_evals = 12;
  int calls = 0;
  const auto r = search_params(
      [&](const eed::EEDParams& p) {
        ++calls;
        return std::pow(p.sigma - 2.0, 2) + std::pow(std::log(p.lambda / 3.0), 2);
      },
      cfg);
  EXPECT_EQ(r.trace.size(), 144u);
  EXPECT_EQ(calls, 145);
  EXPECT_NEAR(r.params.sigma, 2.0, 0.02);
  EXPECT_NEAR(r.params.lambda, 3.0, 0.05);
  EXPECT_FALSE(r.fell_back);
  EXPECT_LE(r.best_mse, r.standard_mse);
  EXPECT_EQ(quantize_params(r.params), r.params);
}

TEST(ParamSearch, FallsBackToStandard) {
  const auto std_params = quantize_params(kStandardParams);
  const auto r = search_params(
      [&](const eed::EEDParams& p) { return p == std_params ? 0.0 : 1.0; }, {});
  EXPECT_TRUE(r.fell_back);
  EXPECT_EQ(r.params, std_params);
  EXPECT_EQ(r.best_mse, 0.0);
  EXPECT_EQ(r.trace.size(), 25u);
}

TEST(ParamSearch, NeverWorseThanStandardOnImage) {
  const Fixture f;
  SparsifyConfig sc{0.1, 0.5, 0.3, 1};
  const auto ym = sparsify(f.init, f.orig, sc, kStandardParams, kStandardParams,
                           ChannelGroup::kLuma);
  const auto cm = sparsify(f.init, f.orig, sc, kStandardParams, kStandardParams,
                           ChannelGroup::kChroma);
  ParamSearchConfig cfg{4, 4};
  const auto choice = optimize_parameters(ym, cm, f.init, f.orig, cfg);
  EXPECT_LE(choice.luma.best_mse, choice.luma.standard_mse);
  EXPECT_LE(choice.chroma.best_mse, choice.chroma.standard_mse);
  EXPECT_EQ(choice.luma.trace.size(), 16u);
  EXPECT_EQ(choice.chroma.trace.size(), 16u);
}

RatioSearchConfig fast_config() {
  RatioSearchConfig cfg;
  cfg.qualities = {30, 60};
  cfg.alphas = {0.5, 1.0};
  cfg.params = {4, 4};
  cfg.nlbe.max_cycles = 10;
  cfg.nlbe.patience = 4;
  return cfg;
}

TEST(RatioOptimizer, MeetsBudgetAndReportsDecodedPsnr) {
  const auto cfg = fast_config();
  const auto r = optimize_for_ratio(mid_image(), {18.0, 0.05}, cfg);
  const std::size_t raw = raw_size(128, 96);
  EXPECT_LE(r.bytes.size(), raw / 18);
  EXPECT_EQ(r.report.bytes, r.bytes.size());
  EXPECT_DOUBLE_EQ(r.report.achieved_ratio, static_cast<double>(raw) / r.bytes.size());
  EXPECT_EQ(read_container(r.bytes), r.container);
  const auto decoded = decode_container(r.bytes, cfg.final_solver);
  EXPECT_DOUBLE_EQ(r.report.psnr, *psnr(mid_image(), decoded));

  const auto& rep = r.report;
  EXPECT_LE(rep.luma_mse_params, rep.luma_mse_sparsified);
  EXPECT_LE(rep.luma_mse_nlbe, rep.luma_mse_params);
  EXPECT_LE(rep.chroma_mse_params, rep.chroma_mse_sparsified);
  EXPECT_LE(rep.chroma_mse_nlbe, rep.chroma_mse_params);
  ASSERT_EQ(rep.stages.size(), 8u);
  EXPECT_EQ(rep.stages.front().stage, "baseline");
  EXPECT_EQ(rep.stages.back().stage, "final");
  EXPECT_EQ(stages_csv(rep).substr(0, 24), "stage,density,mse,bytes\n");
  EXPECT_FALSE(rep.candidates.empty());
}

TEST(RatioOptimizer, ExchangesStayInsideTheRatioWindow) {
  auto cfg = fast_config();
  cfg.nlbe.max_cycles = 30;
  cfg.nlbe.patience = 30;
  const std::size_t raw = raw_size(128, 96);
  RatioOptimizer opt(mid_image(), cfg);
  for (double target : {14.0, 18.0, 22.0}) {
    const auto r = opt.optimize({target, 0.02});
    const auto lo = static_cast<std::size_t>(std::ceil(raw / (target * 1.02)));
    const std::size_t start = r.report.stages[1].bytes;
    EXPECT_LE(r.bytes.size(), raw / target) << target;
    EXPECT_GE(r.bytes.size(), std::min(lo, start)) << target;
    if (start >= lo) EXPECT_TRUE(r.report.within_tolerance) << target;
  }
}

TEST(RatioOptimizer, Deterministic) {
  const auto cfg = fast_config();
  const auto a = optimize_for_ratio(mid_image(), {20.0, 0.05}, cfg);
  const auto b = optimize_for_ratio(mid_image(), {20.0, 0.05}, cfg);
  EXPECT_EQ(a.bytes, b.bytes);
}

TEST(RatioOptimizer, SharedPathsGiveSameAnswers) {
  const auto cfg = fast_config();
  RatioOptimizer opt(mid_image(), cfg);
  const auto first = opt.optimize({16.0, 0.05});
  opt.optimize({10.0, 0.05});
  const auto again = opt.optimize({16.0, 0.05});
  EXPECT_EQ(first.bytes, again.bytes);
  EXPECT_EQ(first.bytes, optimize_for_ratio(mid_image(), {16.0, 0.05}, cfg).bytes);
}

TEST(RatioOptimizer, DegenerateTargetKeepsEverything) {
  auto cfg = fast_config();
  const auto r = optimize_for_ratio(mid_image(), {1.01, 0.05}, cfg);
  EXPECT_EQ(r.report.luma_density, 1.0);
  EXPECT_EQ(r.report.chroma_density, 1.0);
  EXPECT_EQ(r.container.luma_mask.kept_count(), r.container.luma_mask.size());
}

TEST(RatioOptimizer, UnattainableAndInvalidTargets) {
  const auto cfg = fast_config();
  try {
    optimize_for_ratio(mid_image(), {1e6, 0.05}, cfg);
    FAIL();
  } catch (const UnattainableTarget& e) {
    EXPECT_EQ(e.requested(), 1e6);
    EXPECT_GT(e.closest(), 1.0);
    EXPECT_LT(e.closest(), 1e6);
  }
  EXPECT_THROW(optimize_for_ratio(mid_image(), {1.0, 0.05}, cfg), InvalidArgument);
  auto bad = cfg;
  bad.qualities = {0};
  EXPECT_THROW(optimize_for_ratio(mid_image(), {10.0, 0.05}, bad), InvalidArgument);
}

TEST(RatioOptimizer, FixedParametersOverrideSearch) {
  auto cfg = fast_config();
  cfg.luma_params = eed::EEDParams{1.5, 2.0};
  const auto r = optimize_for_ratio(mid_image(), {20.0, 0.05}, cfg);
  EXPECT_EQ(r.container.luma_params, (eed::EEDParams{1.5, 2.0}));
  EXPECT_TRUE(r.report.parameter_search.luma.trace.empty());
  cfg.luma_params = eed::EEDParams{0.0, 2.0};
  EXPECT_THROW(validate(cfg), InvalidArgument);
}

}  // namespace
}  // namespace beed
