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
#include <cstdint>
#include <span>
#include <vector>

#include "beed/image.hpp"

// Baseline sequential DCT JPEG (JFIF), 8-bit, Huffman coded.
namespace beed::jpeg {

// 64 divisors in zig-zag order.
using QuantTable = std::array<std::uint16_t, 64>;

struct QuantTables {
  QuantTable luma;
  QuantTable chroma;
};

// Natural (row-major) index of the k-th zig-zag coefficient.
extern const std::array<std::uint8_t, 64> kZigZagToNatural;

// Example tables from the informative annex, natural order.
extern const std::array<std::uint8_t, 64> kBaseLumaTable;
extern const std::array<std::uint8_t, 64> kBaseChromaTable;

// Throws InvalidArgument for quality outside [1, 100].
QuantTables quality_to_tables(int quality);

using Block = std::array<double, 64>;

// Orthonormal 2-D DCT-II on an 8x8 tile (row-major). The caller applies the
// -128 level shift.
Block fdct8x8(const Block& tile);
Block idct8x8(const Block& coeffs);

enum class TableClass { kLuma, kChroma };
enum class Subsampling { k444, k420 };

// Single-component (greyscale) stream. Edge blocks are padded by edge
// replication. `tables` picks which quantization/Huffman table pair is used,
// so that chroma planes can be coded exactly as in a colour stream.
// `jfif` = false omits the APP0 segment (the stream stays a valid baseline
// interchange file).
std::vector<std::uint8_t> encode_grey(const PixelPlane& plane, int quality,
                                      TableClass tables = TableClass::kLuma,
                                      bool jfif = true);

// Three-component YCbCr stream.
std::vector<std::uint8_t> encode_color(const YCbCrImage& img, int quality,
                                       Subsampling sampling = Subsampling::k444);

struct Decoded {
  int width = 0;
  int height = 0;
  // One plane per component at full image resolution (subsampled
  // components are upsampled), integer sample values in [0, 255].
  std::vector<PixelPlane> components;
};

// Throws FormatError (with the byte offset) on any malformed input.
Decoded decode(std::span<const std::uint8_t> stream);

// Convenience: decode a 3-component stream into a YCbCrImage.
YCbCrImage decode_color(std::span<const std::uint8_t> stream);
PixelPlane decode_grey(std::span<const std::uint8_t> stream);

}  // namespace beed::jpeg
