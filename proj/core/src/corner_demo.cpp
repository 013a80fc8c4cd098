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

#include "beed/corner_demo.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "beed/jpeg.hpp"

namespace beed {

namespace {

// Polygon vertices in block coordinates; pixel position is 8k + 4.
constexpr std::array<std::pair<int, int>, 8> kCornerBlocks = {{
    {3, 3}, {12, 3}, {12, 6}, {9, 6}, {9, 12}, {6, 12}, {6, 6}, {3, 6},
}};

double vertex(int block) { return kBlockSize * block + kBlockSize / 2; }

// Even-odd rule at the pixel centre.
bool inside(double px, double py) {
  bool in = false;
  const std::size_t n = kCornerBlocks.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = vertex(kCornerBlocks[i].first), yi = vertex(kCornerBlocks[i].second);
    const double xj = vertex(kCornerBlocks[j].first), yj = vertex(kCornerBlocks[j].second);
    if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) in = !in;
  }
  return in;
}

}  // namespace

PixelPlane corner_test_image() {
  PixelPlane p(kCornerImageSize, kCornerImageSize);
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x)
      p.at(x, y) = inside(x + 0.5, y + 0.5) ? kCornerInside : kCornerOutside;
  return p;
}

std::vector<int> corner_block_indices() {
  const int nx = kCornerImageSize / kBlockSize;
  std::vector<int> ids;
  for (const auto& [bx, by] : kCornerBlocks) ids.push_back(by * nx + bx);
  std::sort(ids.begin(), ids.end());
  return ids;
}

CornerDemoResult run_corner_demo(const CornerDemoConfig& cfg) {
  CornerDemoResult r;
  r.original = corner_test_image();
  r.init = jpeg::decode_grey(jpeg::encode_grey(r.original, cfg.quality));
  r.corners = corner_block_indices();
  auto hits = [&](const BlockMask& m) {
    int n = 0;
    for (int k : m.kept_indices())
      if (std::binary_search(r.corners.begin(), r.corners.end(), k)) ++n;
    return n;
  };

  const PixelPlane flat(r.original.width, r.original.height, 128.0);
  const YCbCrImage orig{{r.original, flat, flat}};
  const YCbCrImage init{{r.init, flat, flat}};

  SparsifyConfig sc;
  sc.c_ps = cfg.c_ps;
  sc.r_ps = cfg.r_ps;
  sc.seed = cfg.seed;
  const BlockGrid grid(r.original.width, r.original.height);
  sc.target_density = static_cast<double>(cfg.kept_blocks) / grid.count();
  const eed::EEDParams standard = quantize_params(kStandardParams);
  r.sparsified = sparsify(init, orig, sc, standard, standard, ChannelGroup::kLuma,
                          cfg.search_solver);
  r.sparsified_hits = hits(r.sparsified);
  r.mask = r.sparsified;

  r.params = standard;
  if (cfg.optimize_params) {
    r.params = search_params(
                   [&](const eed::EEDParams& p) {
                     const GroupModel m(init, orig, ChannelGroup::kLuma, p, r.init,
                                        cfg.search_solver);
                     return m.mse(m.reconstruct(r.mask));
                   },
                   cfg.param_search)
                   .params;
  }
  if (cfg.run_nlbe && r.mask.kept_count() < grid.count()) {
    NLBEConfig nc = cfg.nlbe;
    nc.seed = cfg.seed;
    const GroupModel m(init, orig, ChannelGroup::kLuma, r.params, r.init,
                       cfg.search_solver);
    r.mask = nlbe(r.mask, m, nc).mask;
  }

  r.kept = r.mask.kept_indices();
  r.corner_hits = hits(r.mask);

  const PixelMask known = r.mask.pixel_mask();
  r.mask_panel = PixelPlane(r.init.width, r.init.height, 0.0);
  for (int y = 0; y < r.init.height; ++y)
    for (int x = 0; x < r.init.width; ++x)
      if (known.at(x, y)) r.mask_panel.at(x, y) = r.init.at(x, y);

  r.reconstruction = eed::inpaint(r.init, known, r.params, cfg.final_solver).image;
  r.psnr = psnr(std::span<const PixelPlane>(&r.original, 1),
                std::span<const PixelPlane>(&r.reconstruction, 1))
               .value_or(99.0);
  return r;
}

}  // namespace beed
