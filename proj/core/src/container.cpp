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

#include "beed/container.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "beed/arith_coder.hpp"
#include "beed/errors.hpp"

namespace beed {

std::uint16_t to_fixed(double v) {
  const double raw = std::round(v * 256.0);
  if (!(raw >= 1.0 && raw <= 65535.0)) {
    throw InvalidArgument("parameter " + std::to_string(v) +
                          " is not representable in 8.8 fixed point");
  }
  return static_cast<std::uint16_t>(raw);
}

double from_fixed(std::uint16_t raw) { return raw / 256.0; }

double quantize_param(double v) {
  return from_fixed(to_fixed(std::clamp(v, 1.0 / 256.0, 65535.0 / 256.0)));
}

eed::EEDParams quantize_params(const eed::EEDParams& p) {
  return {quantize_param(p.sigma), quantize_param(p.lambda)};
}

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint64_t v) {
  if (v > 0xFFFFFFFFull) throw InvalidArgument("section longer than 4 GiB");
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t get_u16(std::span<const std::uint8_t> b, std::size_t off) {
  return (static_cast<std::uint32_t>(b[off]) << 8) | b[off + 1];
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return (static_cast<std::uint32_t>(b[off]) << 24) |
         (static_cast<std::uint32_t>(b[off + 1]) << 16) |
         (static_cast<std::uint32_t>(b[off + 2]) << 8) | b[off + 3];
}

}  // namespace

std::vector<std::uint8_t> write_container(const Container& c) {
  const BlockGrid grid(c.width, c.height);
  if (c.width > 65535 || c.height > 65535) {
    throw InvalidArgument("image too large for the container header");
  }
  if (!(c.luma_mask.grid() == grid) || !(c.chroma_mask.grid() == grid)) {
    throw InvalidArgument("block masks do not match image dimensions");
  }
  const auto mask_y = arith::encode(c.luma_mask.bits());
  const auto mask_c = arith::encode(c.chroma_mask.bits());

  std::vector<std::uint8_t> out;
  out.insert(out.end(), kContainerMagic.begin(), kContainerMagic.end());
  out.push_back(kContainerVersion);
  put_u16(out, static_cast<std::uint32_t>(c.width));
  put_u16(out, static_cast<std::uint32_t>(c.height));
  put_u16(out, to_fixed(c.luma_params.sigma));
  put_u16(out, to_fixed(c.luma_params.lambda));
  put_u16(out, to_fixed(c.chroma_params.sigma));
  put_u16(out, to_fixed(c.chroma_params.lambda));
  put_u32(out, mask_y.size());
  put_u32(out, mask_c.size());
  for (const auto& p : c.payloads) put_u32(out, p.size());
  out.insert(out.end(), mask_y.begin(), mask_y.end());
  out.insert(out.end(), mask_c.begin(), mask_c.end());
  for (const auto& p : c.payloads) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Container read_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) {
    throw FormatError("header", bytes.size(), "truncated container header");
  }
  if (!std::equal(kContainerMagic.begin(), kContainerMagic.end(), bytes.begin())) {
    throw FormatError("magic", 0, "bad magic (not a B-EED container)");
  }
  if (bytes[4] != kContainerVersion) {
    throw FormatError("version", 4, "unsupported version " + std::to_string(bytes[4]));
  }
  Container c;
  c.width = static_cast<int>(get_u16(bytes, 5));
  c.height = static_cast<int>(get_u16(bytes, 7));
  if (c.width == 0 || c.height == 0) {
    throw FormatError(c.width == 0 ? "width" : "height", c.width == 0 ? 5 : 7,
                      "zero image dimension");
  }
  const char* param_names[4] = {"sigma_luma", "lambda_luma", "sigma_chroma",
                                "lambda_chroma"};
  double params[4];
  for (int i = 0; i < 4; ++i) {
    const std::size_t off = 9 + 2 * static_cast<std::size_t>(i);
    const auto raw = static_cast<std::uint16_t>(get_u16(bytes, off));
    if (raw == 0) throw FormatError(param_names[i], off, "parameter must be positive");
    params[i] = from_fixed(raw);
  }
  c.luma_params = {params[0], params[1]};
  c.chroma_params = {params[2], params[3]};

  const char* len_names[5] = {"mask_len_luma", "mask_len_chroma", "payload_len_y",
                              "payload_len_cb", "payload_len_cr"};
  std::uint64_t lens[5];
  std::uint64_t total = kHeaderSize;
  for (int i = 0; i < 5; ++i) {
    lens[i] = get_u32(bytes, 17 + 4 * static_cast<std::size_t>(i));
    total += lens[i];
    if (total > bytes.size()) {
      throw FormatError(len_names[i], 17 + 4 * static_cast<std::size_t>(i),
                        "length overruns the container (" +
                            std::to_string(bytes.size()) + " bytes)");
    }
  }
  if (total != bytes.size()) {
    throw FormatError("payload_len_cr", 33,
                      "section lengths do not account for the whole file");
  }

  const BlockGrid grid(c.width, c.height);
  std::size_t off = kHeaderSize;
  auto section = [&](int i) {
    auto s = bytes.subspan(off, static_cast<std::size_t>(lens[i]));
    off += static_cast<std::size_t>(lens[i]);
    return s;
  };
  auto read_mask = [&](int i) {
    const std::size_t start = off;
    auto s = section(i);
    std::vector<bool> bits;
    try {
      bits = arith::decode(s, static_cast<std::size_t>(grid.count()));
    } catch (const FormatError& e) {
      throw FormatError(len_names[i], start + e.offset(),
                        std::string("inconsistent mask bit count: ") + e.what());
    }
    BlockMask m = BlockMask::from_bits(grid, bits);
    if (m.kept_count() == 0) {
      throw FormatError(len_names[i], start, "mask keeps no block");
    }
    return m;
  };
  c.luma_mask = read_mask(0);
  c.chroma_mask = read_mask(1);
  for (int i = 0; i < 3; ++i) {
    auto s = section(2 + i);
    c.payloads[i].assign(s.begin(), s.end());
  }
  return c;
}

PackLayout pack_layout(int kept_blocks) {
  if (kept_blocks < 1) throw InvalidArgument("packing needs at least one kept block");
  PackLayout l;
  l.cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(kept_blocks))));
  // guard against sqrt rounding on perfect squares
  while (l.cols > 1 && (l.cols - 1) * (l.cols - 1) >= kept_blocks) --l.cols;
  while (l.cols * l.cols < kept_blocks) ++l.cols;
  l.rows = (kept_blocks + l.cols - 1) / l.cols;
  return l;
}

PixelPlane pack_blocks(const PixelPlane& plane, const BlockMask& mask) {
  const auto kept = mask.kept_indices();
  const PackLayout l = pack_layout(static_cast<int>(kept.size()));
  PixelPlane packed(l.cols * kBlockSize, l.rows * kBlockSize, 128.0);
  const BlockGrid packed_grid(packed.width, packed.height);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const Tile t = block_extract(plane, mask.grid(), kept[i]);
    block_place(packed, packed_grid, static_cast<int>(i), t);
  }
  return packed;
}

void unpack_blocks(const PixelPlane& packed, const BlockMask& mask,
                   PixelPlane& target) {
  const auto kept = mask.kept_indices();
  const PackLayout l = pack_layout(static_cast<int>(kept.size()));
  if (packed.width != l.cols * kBlockSize || packed.height != l.rows * kBlockSize) {
    throw InvalidArgument("packed image geometry does not match mask");
  }
  const BlockGrid packed_grid(packed.width, packed.height);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const Tile t = block_extract(packed, packed_grid, static_cast<int>(i));
    block_place(target, mask.grid(), kept[i], t);
  }
}

}  // namespace beed
