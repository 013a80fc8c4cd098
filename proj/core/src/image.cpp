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

#include "beed/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "beed/errors.hpp"

namespace beed {

PixelPlane::PixelPlane(int w, int h, double fill)
    : width(w), height(h) {
  if (w < 0 || h < 0) throw InvalidArgument("negative plane dimensions");
  samples.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h),
                 fill);
}

PixelMask::PixelMask(int w, int h, bool fill) : width(w), height(h) {
  known.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h),
               fill ? 1 : 0);
}

std::size_t PixelMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(known.begin(), known.end(), [](auto v) { return v != 0; }));
}

BlockGrid::BlockGrid(int width, int height)
    : width_(width),
      height_(height),
      nx_((width + kBlockSize - 1) / kBlockSize),
      ny_((height + kBlockSize - 1) / kBlockSize) {
  if (width <= 0 || height <= 0) {
    throw InvalidArgument("block grid needs positive dimensions");
  }
}

BlockRect BlockGrid::rect(int index) const {
  if (index < 0 || index >= count()) {
    throw InvalidArgument("block index " + std::to_string(index) +
                          " out of range");
  }
  BlockRect r;
  r.x0 = (index % nx_) * kBlockSize;
  r.y0 = (index / nx_) * kBlockSize;
  r.w = std::min(kBlockSize, width_ - r.x0);
  r.h = std::min(kBlockSize, height_ - r.y0);
  return r;
}

BlockMask::BlockMask(const BlockGrid& grid, bool all_kept)
    : grid_(grid), kept_(static_cast<std::size_t>(grid.count()), all_kept) {}

int BlockMask::kept_count() const {
  return static_cast<int>(std::count(kept_.begin(), kept_.end(), 1));
}

double BlockMask::density() const {
  return size() == 0 ? 0.0 : static_cast<double>(kept_count()) / size();
}

std::vector<int> BlockMask::kept_indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (kept_[i]) out.push_back(i);
  return out;
}

std::vector<int> BlockMask::removed_indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (!kept_[i]) out.push_back(i);
  return out;
}

PixelMask BlockMask::pixel_mask() const {
  PixelMask m(grid_.width(), grid_.height());
  for (int i = 0; i < size(); ++i) {
    if (!kept_[i]) continue;
    const BlockRect r = grid_.rect(i);
    for (int y = r.y0; y < r.y0 + r.h; ++y)
      for (int x = r.x0; x < r.x0 + r.w; ++x) m.set(x, y, true);
  }
  return m;
}

std::vector<bool> BlockMask::bits() const {
  return std::vector<bool>(kept_.begin(), kept_.end());
}

BlockMask BlockMask::from_bits(const BlockGrid& grid,
                               const std::vector<bool>& bits) {
  if (static_cast<int>(bits.size()) != grid.count()) {
    throw InvalidArgument("mask bit count does not match block grid");
  }
  BlockMask m(grid, false);
  for (int i = 0; i < grid.count(); ++i) m.set_kept(i, bits[i]);
  return m;
}

Tile block_extract(const PixelPlane& plane, const BlockGrid& grid, int index) {
  if (plane.width != grid.width() || plane.height != grid.height()) {
    throw InvalidArgument("plane does not match block grid");
  }
  const BlockRect r = grid.rect(index);
  Tile t{};
  for (int y = 0; y < kBlockSize; ++y) {
    const int sy = r.y0 + std::min(y, r.h - 1);
    for (int x = 0; x < kBlockSize; ++x) {
      const int sx = r.x0 + std::min(x, r.w - 1);
      t[y * kBlockSize + x] = plane.at(sx, sy);
    }
  }
  return t;
}

void block_place(PixelPlane& plane, const BlockGrid& grid, int index,
                 const Tile& tile) {
  if (plane.width != grid.width() || plane.height != grid.height()) {
    throw InvalidArgument("plane does not match block grid");
  }
  const BlockRect r = grid.rect(index);
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x)
      plane.at(r.x0 + x, r.y0 + y) = tile[y * kBlockSize + x];
}

namespace {

constexpr double kKr = 0.299;
constexpr double kKg = 0.587;
constexpr double kKb = 0.114;
constexpr double kCbScale = 0.564;
constexpr double kCrScale = 0.713;

void require_same_shape(const std::array<PixelPlane, 3>& c) {
  if (!c[0].same_shape(c[1]) || !c[0].same_shape(c[2])) {
    throw InvalidArgument("colour planes differ in dimensions");
  }
}

}  // namespace

YCbCrImage rgb_to_ycbcr(const RgbImage& rgb) {
  require_same_shape(rgb.channels);
  const int w = rgb.width(), h = rgb.height();
  YCbCrImage out{{PixelPlane(w, h), PixelPlane(w, h), PixelPlane(w, h)}};
  for (std::size_t i = 0; i < rgb.r().size(); ++i) {
    const double r = rgb.r().samples[i];
    const double g = rgb.g().samples[i];
    const double b = rgb.b().samples[i];
    const double y = kKr * r + kKg * g + kKb * b;
    out.y().samples[i] = y;
    out.cb().samples[i] = 128.0 + (b - y) * kCbScale;
    out.cr().samples[i] = 128.0 + (r - y) * kCrScale;
  }
  return out;
}

RgbImage ycbcr_to_rgb(const YCbCrImage& ycc) {
  require_same_shape(ycc.channels);
  const int w = ycc.width(), h = ycc.height();
  RgbImage out{{PixelPlane(w, h), PixelPlane(w, h), PixelPlane(w, h)}};
  for (std::size_t i = 0; i < ycc.y().size(); ++i) {
    const double y = ycc.y().samples[i];
    const double b = y + (ycc.cb().samples[i] - 128.0) / kCbScale;
    const double r = y + (ycc.cr().samples[i] - 128.0) / kCrScale;
    const double g = (y - kKr * r - kKb * b) / kKg;
    out.r().samples[i] = clamp_sample(r);
    out.g().samples[i] = clamp_sample(g);
    out.b().samples[i] = clamp_sample(b);
  }
  return out;
}

double clamp_sample(double v) { return std::clamp(v, 0.0, 255.0); }

std::uint8_t quantize_sample(double v) {
  return static_cast<std::uint8_t>(std::floor(clamp_sample(v) + 0.5));
}

double mse(std::span<const PixelPlane> a, std::span<const PixelPlane> b) {
  if (a.size() != b.size() || a.empty()) {
    throw InvalidArgument("plane sets differ in channel count");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (!a[c].same_shape(b[c])) {
      throw InvalidArgument("planes differ in dimensions");
    }
    for (std::size_t i = 0; i < a[c].size(); ++i) {
      const double d = a[c].samples[i] - b[c].samples[i];
      sum += d * d;
    }
    n += a[c].size();
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double mse(const PixelPlane& a, const PixelPlane& b) {
  return mse(std::span<const PixelPlane>(&a, 1), std::span<const PixelPlane>(&b, 1));
}

std::optional<double> psnr(std::span<const PixelPlane> a,
                           std::span<const PixelPlane> b) {
  const double e = mse(a, b);
  if (e == 0.0) return std::nullopt;
  return 10.0 * std::log10(255.0 * 255.0 / e);
}

std::optional<double> psnr(const RgbImage& a, const RgbImage& b) {
  return psnr(std::span<const PixelPlane>(a.channels),
              std::span<const PixelPlane>(b.channels));
}

RgbImage grey_to_rgb(const PixelPlane& grey) {
  return RgbImage{{grey, grey, grey}};
}

}  // namespace beed
