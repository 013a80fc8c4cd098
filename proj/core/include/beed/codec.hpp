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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "beed/container.hpp"
#include "beed/eed.hpp"
#include "beed/image.hpp"

namespace beed {

// Raw 24-bit RGB size of a width x height image; the numerator of every
// compression ratio.
std::size_t raw_size(int width, int height);

// The baseline JPEG decode of each plane at quality q (4:4:4, luma tables for
// Y, chroma tables for Cb and Cr). Kept blocks of a container built at the
// same q decode to exactly these values.
YCbCrImage baseline_planes(const YCbCrImage& orig, int quality);

// Packs and codes the kept blocks of `orig` at quality q.
Container build_container(const YCbCrImage& orig, int quality,
                          const BlockMask& luma_mask, const BlockMask& chroma_mask,
                          const eed::EEDParams& luma_params,
                          const eed::EEDParams& chroma_params);

// Decodes the payloads and places the kept blocks; removed blocks are 0.
// Payload errors carry offsets relative to the start of the payload.
YCbCrImage place_kept_blocks(const Container& c);

// Diffusion tensor of the reconstructed luma under the chroma parameters.
eed::TensorField chroma_guide(const PixelPlane& luma, const eed::EEDParams& chroma);

struct DecodeStats {
  bool converged = true;
  int inner_iterations = 0;
};

// Full decoder: kept blocks, EED inpainting of Y, luma-guided inpainting of
// Cb and Cr. Real-valued output.
YCbCrImage reconstruct(const Container& c, const eed::SolverConfig& cfg = {},
                       DecodeStats* stats = nullptr);

// reconstruct() followed by colour conversion and 8-bit quantization.
RgbImage decode_container(std::span<const std::uint8_t> bytes,
                          const eed::SolverConfig& cfg = {},
                          DecodeStats* stats = nullptr);

// Rounds every sample to its 8-bit output value.
RgbImage quantize_rgb(const RgbImage& img);

// Pure JPEG reference: 4:2:0 colour stream at every quality 1..100.
struct JpegPoint {
  int quality = 0;
  std::size_t bytes = 0;
  double ratio = 0.0;
  double psnr = 0.0;
};
std::vector<JpegPoint> jpeg_rd_curve(const RgbImage& orig);
// PSNR at `ratio`, linearly interpolated between the neighbouring points of
// the curve. Throws InvalidArgument when the ratio lies outside the curve.
double jpeg_psnr_at_ratio(const std::vector<JpegPoint>& curve, double ratio);

}  // namespace beed
