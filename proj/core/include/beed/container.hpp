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
#include <span>
#include <vector>

#include "beed/eed.hpp"
#include "beed/image.hpp"

// The .beed container. All integers are big-endian.
//
//   offset size field
//   0      4    magic "BEED"
//   4      1    version (1)
//   5      2    width
//   7      2    height
//   9      2    sigma luma       (unsigned 8.8 fixed point)
//   11     2    lambda luma
//   13     2    sigma chroma
//   15     2    lambda chroma
//   17     4    coded luma mask length
//   21     4    coded chroma mask length
//   25     4    Y payload length
//   29     4    Cb payload length
//   33     4    Cr payload length
//   37          luma mask, chroma mask, Y, Cb, Cr payloads back to back
//
// Masks are arithmetic-coded row-major block bits (1 = kept). Payloads are
// greyscale baseline JPEG streams of the packed kept blocks.
namespace beed {

inline constexpr std::array<std::uint8_t, 4> kContainerMagic = {'B', 'E', 'E', 'D'};
inline constexpr std::uint8_t kContainerVersion = 1;
inline constexpr std::size_t kHeaderSize = 37;

// 8.8 fixed point used for sigma and lambda in the header.
std::uint16_t to_fixed(double v);
double from_fixed(std::uint16_t raw);
// Rounds to the nearest representable header value (at least 1/256).
double quantize_param(double v);
eed::EEDParams quantize_params(const eed::EEDParams& p);

struct Container {
  int width = 0;
  int height = 0;
  eed::EEDParams luma_params;
  eed::EEDParams chroma_params;
  BlockMask luma_mask;
  BlockMask chroma_mask;  // shared by Cb and Cr
  std::array<std::vector<std::uint8_t>, 3> payloads;  // Y, Cb, Cr

  bool operator==(const Container&) const = default;
};

std::vector<std::uint8_t> write_container(const Container& c);
// Structural parse; JPEG payloads are returned undecoded. Throws FormatError
// naming the offending field.
Container read_container(std::span<const std::uint8_t> bytes);

struct PackLayout {
  int cols = 0;  // in blocks
  int rows = 0;
};

// cols = ceil(sqrt(n)), rows = ceil(n / cols)
PackLayout pack_layout(int kept_blocks);

// Kept blocks in ascending block order, laid out row-major in a
// (8 cols) x (8 rows) image; unused cells are 128.
PixelPlane pack_blocks(const PixelPlane& plane, const BlockMask& mask);
// Writes block i of `packed` to the i-th kept block of `mask` in `target`.
void unpack_blocks(const PixelPlane& packed, const BlockMask& mask,
                   PixelPlane& target);

}  // namespace beed
