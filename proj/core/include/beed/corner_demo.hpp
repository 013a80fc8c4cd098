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

#pragma once

#include <cstdint>
#include <vector>

#include "beed/eed.hpp"
#include "beed/image.hpp"
#include "beed/mask_opt.hpp"

namespace beed {

// 128x128 grey test image: a T-shaped polygon (value 200) on a 60
// background. Each of its 8 corners sits at the centre of its own block.
inline constexpr int kCornerImageSize = 128;
inline constexpr double kCornerInside = 200.0;
inline constexpr double kCornerOutside = 60.0;

PixelPlane corner_test_image();
// Row-major block ids of the blocks holding a corner, ascending.
std::vector<int> corner_block_indices();

struct CornerDemoConfig {
  std::uint64_t seed = 1;
  int quality = 90;  // baseline JPEG quality of the initialization
  int kept_blocks = 8;
  double c_ps = 0.10;
  double r_ps = 0.50;
  bool optimize_params = true;
  ParamSearchConfig param_search{8, 8};
  bool run_nlbe = true;
  // One exchange per cycle: the worst of ~90% of the removed blocks goes in,
  // one random kept block goes out.
  NLBEConfig nlbe{0.9, 0.004, 200, 50};
  eed::SolverConfig search_solver = kSearchSolver;
  eed::SolverConfig final_solver;
};

struct CornerDemoResult {
  PixelPlane original;
  PixelPlane init;            // baseline JPEG decode
  PixelPlane mask_panel;      // kept blocks from `init`, removed blocks black
  PixelPlane reconstruction;  // EED inpainting from the kept blocks
  BlockMask sparsified;       // after sparsification alone
  BlockMask mask;             // final
  eed::EEDParams params;      // used for the final reconstruction
  std::vector<int> kept;      // ascending
  std::vector<int> corners;   // ascending
  int corner_hits = 0;        // kept blocks that contain a corner
  int sparsified_hits = 0;
  double psnr = 0.0;          // reconstruction vs original
};

// Sparsification with the standard parameters, parameter search, then NLBE
// under the found parameters.
CornerDemoResult run_corner_demo(const CornerDemoConfig& cfg = {});

}  // namespace beed
