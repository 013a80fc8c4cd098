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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace beed {

inline constexpr int kBlockSize = 8;
inline constexpr int kBlockPixels = kBlockSize * kBlockSize;

// One real-valued channel, row-major, nominal range [0, 255].
struct PixelPlane {
  int width = 0;
  int height = 0;
  std::vector<double> samples;

  PixelPlane() = default;
  PixelPlane(int w, int h, double fill = 0.0);

  double& at(int x, int y) { return samples[index(x, y)]; }
  double at(int x, int y) const { return samples[index(x, y)]; }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }
  std::size_t size() const { return samples.size(); }
  bool same_shape(const PixelPlane& o) const {
    return width == o.width && height == o.height;
  }
  bool operator==(const PixelPlane&) const = default;
};

struct RgbImage {
  std::array<PixelPlane, 3> channels;

  PixelPlane& r() { return channels[0]; }
  PixelPlane& g() { return channels[1]; }
  PixelPlane& b() { return channels[2]; }
  const PixelPlane& r() const { return channels[0]; }
  const PixelPlane& g() const { return channels[1]; }
  const PixelPlane& b() const { return channels[2]; }
  int width() const { return channels[0].width; }
  int height() const { return channels[0].height; }
};

struct YCbCrImage {
  std::array<PixelPlane, 3> channels;

  PixelPlane& y() { return channels[0]; }
  PixelPlane& cb() { return channels[1]; }
  PixelPlane& cr() { return channels[2]; }
  const PixelPlane& y() const { return channels[0]; }
  const PixelPlane& cb() const { return channels[1]; }
  const PixelPlane& cr() const { return channels[2]; }
  int width() const { return channels[0].width; }
  int height() const { return channels[0].height; }
};

// Boolean per-pixel plane; nonzero marks a known (stored) pixel.
struct PixelMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> known;

  PixelMask() = default;
  PixelMask(int w, int h, bool fill = false);
  bool at(int x, int y) const {
    return known[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    known[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t count() const;
};

struct BlockRect {
  int x0 = 0;
  int y0 = 0;
  int w = 0;  // real (unpadded) extent
  int h = 0;
};

// Partition of a width x height image into 8x8 blocks, row-major block ids.
// Blocks on the right and bottom edges may be partial.
class BlockGrid {
 public:
  BlockGrid() = default;
  BlockGrid(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int count() const { return nx_ * ny_; }
  BlockRect rect(int index) const;

  bool operator==(const BlockGrid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int nx_ = 0;
  int ny_ = 0;
};

class BlockMask {
 public:
  BlockMask() = default;
  explicit BlockMask(const BlockGrid& grid, bool all_kept = true);

  const BlockGrid& grid() const { return grid_; }
  int size() const { return grid_.count(); }
  bool kept(int index) const { return kept_[index] != 0; }
  void set_kept(int index, bool v) { kept_[index] = v ? 1 : 0; }
  int kept_count() const;
  double density() const;

  // Ascending block ids.
  std::vector<int> kept_indices() const;
  std::vector<int> removed_indices() const;

  // The union of the real pixels of all kept blocks.
  PixelMask pixel_mask() const;

  std::vector<bool> bits() const;
  static BlockMask from_bits(const BlockGrid& grid, const std::vector<bool>& bits);

  bool operator==(const BlockMask&) const = default;

 private:
  BlockGrid grid_;
  std::vector<std::uint8_t> kept_;
};

using Tile = std::array<double, kBlockPixels>;

// Copies one block; partial blocks are padded to 8x8 by edge replication.
Tile block_extract(const PixelPlane& plane, const BlockGrid& grid, int index);
// Writes the unpadded part of `tile` back into its block.
void block_place(PixelPlane& plane, const BlockGrid& grid, int index,
                 const Tile& tile);

// Full-range BT.601 as used by JFIF. No clamping: chroma of saturated
// colours may leave [0, 255] and is only clamped when quantized to 8 bits.
YCbCrImage rgb_to_ycbcr(const RgbImage& rgb);
// Exact inverse of rgb_to_ycbcr, clamped to [0, 255].
RgbImage ycbcr_to_rgb(const YCbCrImage& ycc);

double clamp_sample(double v);
// Round-half-up to the nearest integer in [0, 255].
std::uint8_t quantize_sample(double v);

// Mean squared error over all samples of all planes.
double mse(std::span<const PixelPlane> a, std::span<const PixelPlane> b);
double mse(const PixelPlane& a, const PixelPlane& b);

// 10 log10(255^2 / MSE). std::nullopt means the inputs are identical.
std::optional<double> psnr(std::span<const PixelPlane> a,
                           std::span<const PixelPlane> b);
std::optional<double> psnr(const RgbImage& a, const RgbImage& b);

// Replicates a grey plane into three identical RGB channels.
RgbImage grey_to_rgb(const PixelPlane& grey);

}  // namespace beed
