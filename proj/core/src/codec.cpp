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

#include "beed/codec.hpp"

#include <algorithm>

#include "beed/errors.hpp"
#include "beed/jpeg.hpp"

namespace beed {

namespace {

constexpr jpeg::TableClass kPlaneTables[3] = {
    jpeg::TableClass::kLuma, jpeg::TableClass::kChroma, jpeg::TableClass::kChroma};
const char* const kPayloadFields[3] = {"payload_y", "payload_cb", "payload_cr"};

}  // namespace

std::size_t raw_size(int width, int height) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
}

YCbCrImage baseline_planes(const YCbCrImage& orig, int quality) {
  YCbCrImage out;
  for (int c = 0; c < 3; ++c) {
    out.channels[c] =
        jpeg::decode_grey(jpeg::encode_grey(orig.channels[c], quality, kPlaneTables[c]));
  }
  return out;
}

Container build_container(const YCbCrImage& orig, int quality,
                          const BlockMask& luma_mask, const BlockMask& chroma_mask,
                          const eed::EEDParams& luma_params,
                          const eed::EEDParams& chroma_params) {
  Container c;
  c.width = orig.width();
  c.height = orig.height();
  c.luma_params = quantize_params(luma_params);
  c.chroma_params = quantize_params(chroma_params);
  c.luma_mask = luma_mask;
  c.chroma_mask = chroma_mask;
  for (int p = 0; p < 3; ++p) {
    const BlockMask& m = p == 0 ? luma_mask : chroma_mask;
    c.payloads[p] = jpeg::encode_grey(pack_blocks(orig.channels[p], m), quality,
                                      kPlaneTables[p], false);
  }
  return c;
}

YCbCrImage place_kept_blocks(const Container& c) {
  YCbCrImage out;
  for (int p = 0; p < 3; ++p) {
    const BlockMask& m = p == 0 ? c.luma_mask : c.chroma_mask;
    jpeg::Decoded d;
    try {
      d = jpeg::decode(c.payloads[p]);
    } catch (const FormatError& e) {
      throw FormatError(kPayloadFields[p], e.offset(), e.what());
    }
    if (d.components.size() != 1) {
      throw FormatError(kPayloadFields[p], 0, "payload must be a greyscale JPEG");
    }
    const PackLayout l = pack_layout(m.kept_count());
    if (d.width != l.cols * kBlockSize || d.height != l.rows * kBlockSize) {
      throw FormatError(kPayloadFields[p], 0,
                        "packed image is " + std::to_string(d.width) + "x" +
                            std::to_string(d.height) + ", mask needs " +
                            std::to_string(l.cols * kBlockSize) + "x" +
                            std::to_string(l.rows * kBlockSize));
    }
    out.channels[p] = PixelPlane(c.width, c.height, 0.0);
    unpack_blocks(d.components[0], m, out.channels[p]);
  }
  return out;
}

eed::TensorField chroma_guide(const PixelPlane& luma, const eed::EEDParams& chroma) {
  return eed::diffusion_tensor(luma, chroma);
}

YCbCrImage reconstruct(const Container& c, const eed::SolverConfig& cfg,
                       DecodeStats* stats) {
  YCbCrImage img = place_kept_blocks(c);
  DecodeStats local;
  const PixelMask luma_known = c.luma_mask.pixel_mask();
  auto y = eed::inpaint(img.y(), luma_known, c.luma_params, cfg);
  local.converged = y.converged;
  local.inner_iterations = y.inner_iterations;
  img.y() = std::move(y.image);

  const eed::TensorField guide = chroma_guide(img.y(), c.chroma_params);
  const PixelMask chroma_known = c.chroma_mask.pixel_mask();
  for (int p = 1; p < 3; ++p) {
    auto r = eed::inpaint_guided(img.channels[p], chroma_known, guide, cfg);
    local.converged = local.converged && r.converged;
    local.inner_iterations += r.inner_iterations;
    img.channels[p] = std::move(r.image);
  }
  if (stats) *stats = local;
  return img;
}

RgbImage quantize_rgb(const RgbImage& img) {
  RgbImage out = img;
  for (auto& ch : out.channels)
    for (auto& v : ch.samples) v = quantize_sample(v);
  return out;
}

RgbImage decode_container(std::span<const std::uint8_t> bytes,
                          const eed::SolverConfig& cfg, DecodeStats* stats) {
  const Container c = read_container(bytes);
  return quantize_rgb(ycbcr_to_rgb(reconstruct(c, cfg, stats)));
}

std::vector<JpegPoint> jpeg_rd_curve(const RgbImage& orig) {
  const YCbCrImage ycc = rgb_to_ycbcr(orig);
  const std::size_t raw = raw_size(orig.width(), orig.height());
  std::vector<JpegPoint> curve;
  for (int q = 1; q <= 100; ++q) {
    const auto stream = jpeg::encode_color(ycc, q, jpeg::Subsampling::k420);
    const RgbImage dec = quantize_rgb(ycbcr_to_rgb(jpeg::decode_color(stream)));
    JpegPoint pt;
    pt.quality = q;
    pt.bytes = stream.size();
    pt.ratio = static_cast<double>(raw) / static_cast<double>(stream.size());
    pt.psnr = psnr(orig, dec).value_or(99.0);
    curve.push_back(pt);
  }
  return curve;
}

double jpeg_psnr_at_ratio(const std::vector<JpegPoint>& curve, double ratio) {
  std::vector<JpegPoint> pts = curve;
  std::sort(pts.begin(), pts.end(), [](const JpegPoint& a, const JpegPoint& b) {
    return a.ratio < b.ratio || (a.ratio == b.ratio && a.quality < b.quality);
  });
  if (pts.empty() || ratio < pts.front().ratio || ratio > pts.back().ratio) {
    throw InvalidArgument("ratio outside the JPEG quality range");
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (ratio <= pts[i].ratio) {
      const JpegPoint& a = pts[i - 1];
      const JpegPoint& b = pts[i];
      if (b.ratio == a.ratio) return std::max(a.psnr, b.psnr);
      const double t = (ratio - a.ratio) / (b.ratio - a.ratio);
      return a.psnr + t * (b.psnr - a.psnr);
    }
  }
  return pts.back().psnr;
}

}  // namespace beed
