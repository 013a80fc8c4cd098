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

#include "beed/jpeg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "beed/errors.hpp"

namespace beed::jpeg {

const std::array<std::uint8_t, 64> kZigZagToNatural = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

const std::array<std::uint8_t, 64> kBaseLumaTable = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

const std::array<std::uint8_t, 64> kBaseChromaTable = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

QuantTables quality_to_tables(int quality) {
  if (quality < 1 || quality > 100) {
    throw InvalidArgument("JPEG quality must be in [1, 100], got " +
                          std::to_string(quality));
  }
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  auto scaled = [scale](const std::array<std::uint8_t, 64>& base) {
    QuantTable t{};
    for (int k = 0; k < 64; ++k) {
      const int v = (base[kZigZagToNatural[k]] * scale + 50) / 100;
      t[k] = static_cast<std::uint16_t>(std::clamp(v, 1, 255));
    }
    return t;
  };
  return {scaled(kBaseLumaTable), scaled(kBaseChromaTable)};
}

namespace {

// cos_table[u][x] = alpha(u) cos((2x + 1) u pi / 16)
struct DctMatrix {
  std::array<std::array<double, 8>, 8> m{};
  DctMatrix() {
    const double pi = std::acos(-1.0);
    for (int u = 0; u < 8; ++u) {
      const double alpha = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) {
        m[u][x] = alpha * std::cos((2 * x + 1) * u * pi / 16.0);
      }
    }
  }
};

const DctMatrix& dct_matrix() {
  static const DctMatrix d;
  return d;
}

}  // namespace

Block fdct8x8(const Block& tile) {
  const auto& c = dct_matrix().m;
  Block tmp{}, out{};
  // rows
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double s = 0.0;
      for (int x = 0; x < 8; ++x) s += c[u][x] * tile[y * 8 + x];
      tmp[y * 8 + u] = s;
    }
  // columns
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int y = 0; y < 8; ++y) s += c[v][y] * tmp[y * 8 + u];
      out[v * 8 + u] = s;
    }
  return out;
}

Block idct8x8(const Block& coeffs) {
  const auto& c = dct_matrix().m;
  Block tmp{}, out{};
  for (int v = 0; v < 8; ++v)
    for (int x = 0; x < 8; ++x) {
      double s = 0.0;
      for (int u = 0; u < 8; ++u) s += c[u][x] * coeffs[v * 8 + u];
      tmp[v * 8 + x] = s;
    }
  for (int x = 0; x < 8; ++x)
    for (int y = 0; y < 8; ++y) {
      double s = 0.0;
      for (int v = 0; v < 8; ++v) s += c[v][y] * tmp[v * 8 + x];
      out[y * 8 + x] = s;
    }
  return out;
}

namespace {

// ---------------------------------------------------------------------------
// Standard Huffman tables (annex K.3).

struct HuffSpec {
  std::array<std::uint8_t, 16> bits;
  std::vector<std::uint8_t> vals;
};

const HuffSpec kDcLuma{{0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
                       {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
const HuffSpec kDcChroma{{0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
                         {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
const HuffSpec kAcLuma{
    {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 125},
    {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06,
     0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
     0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0, 0x24, 0x33, 0x62, 0x72,
     0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
     0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45,
     0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
     0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75,
     0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
     0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3,
     0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
     0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9,
     0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
     0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4,
     0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA}};
const HuffSpec kAcChroma{
    {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 119},
    {0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41,
     0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
     0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0, 0x15, 0x62, 0x72, 0xD1,
     0x0A, 0x16, 0x24, 0x34, 0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
     0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44,
     0x45, 0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
     0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74,
     0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
     0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A,
     0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
     0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7,
     0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
     0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF2, 0xF3, 0xF4,
     0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA}};

struct HuffCode {
  std::uint16_t code = 0;
  std::uint8_t length = 0;
};
using HuffEncoder = std::array<HuffCode, 256>;

HuffEncoder build_encoder(const HuffSpec& spec) {
  HuffEncoder enc{};
  std::uint16_t code = 0;
  std::size_t k = 0;
  for (int len = 1; len <= 16; ++len) {
    for (int i = 0; i < spec.bits[len - 1]; ++i) {
      enc[spec.vals[k++]] = {code, static_cast<std::uint8_t>(len)};
      ++code;
    }
    code <<= 1;
  }
  return enc;
}

// ---------------------------------------------------------------------------
// Encoder

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint32_t bits, int count) {
    for (int i = count - 1; i >= 0; --i) {
      acc_ = (acc_ << 1) | ((bits >> i) & 1u);
      if (++filled_ == 8) emit();
    }
  }

  // Pads the final byte with one-bits.
  void flush() {
    while (filled_ != 0) {
      acc_ = (acc_ << 1) | 1u;
      if (++filled_ == 8) emit();
    }
  }

 private:
  void emit() {
    const auto byte = static_cast<std::uint8_t>(acc_ & 0xFF);
    out_.push_back(byte);
    if (byte == 0xFF) out_.push_back(0x00);
    acc_ = 0;
    filled_ = 0;
  }

  std::vector<std::uint8_t>& out_;
  std::uint32_t acc_ = 0;
  int filled_ = 0;
};

void put_u16(std::vector<std::uint8_t>& out, int v) {
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void put_marker(std::vector<std::uint8_t>& out, std::uint8_t marker) {
  out.push_back(0xFF);
  out.push_back(marker);
}

int category(int v) {
  int a = v < 0 ? -v : v;
  int n = 0;
  while (a) {
    ++n;
    a >>= 1;
  }
  return n;
}

std::uint32_t magnitude_bits(int v, int cat) {
  return static_cast<std::uint32_t>(v < 0 ? v + (1 << cat) - 1 : v);
}

struct EncComponent {
  PixelPlane plane;  // at component resolution
  int h = 1;
  int v = 1;
  TableClass cls = TableClass::kLuma;
  int pred = 0;
};

std::array<int, 64> quantize_block(const PixelPlane& plane, int bx, int by,
                                   const QuantTable& q) {
  Block tile{};
  for (int y = 0; y < 8; ++y) {
    const int sy = std::min(by * 8 + y, plane.height - 1);
    for (int x = 0; x < 8; ++x) {
      const int sx = std::min(bx * 8 + x, plane.width - 1);
      tile[y * 8 + x] = static_cast<double>(quantize_sample(plane.at(sx, sy))) - 128.0;
    }
  }
  const Block coeffs = fdct8x8(tile);
  std::array<int, 64> zz{};
  for (int k = 0; k < 64; ++k) {
    zz[k] = static_cast<int>(std::round(coeffs[kZigZagToNatural[k]] / q[k]));
  }
  return zz;
}

void encode_block(BitWriter& bw, const std::array<int, 64>& zz, int& pred,
                  const HuffEncoder& dc, const HuffEncoder& ac) {
  const int diff = zz[0] - pred;
  pred = zz[0];
  const int dcat = category(diff);
  bw.put(dc[dcat].code, dc[dcat].length);
  if (dcat) bw.put(magnitude_bits(diff, dcat), dcat);

  int last = 0;
  for (int k = 63; k > 0; --k)
    if (zz[k] != 0) {
      last = k;
      break;
    }
  int run = 0;
  for (int k = 1; k <= last; ++k) {
    if (zz[k] == 0) {
      ++run;
      continue;
    }
    while (run > 15) {
      bw.put(ac[0xF0].code, ac[0xF0].length);
      run -= 16;
    }
    const int cat = category(zz[k]);
    const int sym = (run << 4) | cat;
    bw.put(ac[sym].code, ac[sym].length);
    bw.put(magnitude_bits(zz[k], cat), cat);
    run = 0;
  }
  if (last < 63) bw.put(ac[0x00].code, ac[0x00].length);
}

void write_dqt(std::vector<std::uint8_t>& out, int id, const QuantTable& t) {
  put_marker(out, 0xDB);
  put_u16(out, 2 + 65);
  out.push_back(static_cast<std::uint8_t>(id));
  for (auto v : t) out.push_back(static_cast<std::uint8_t>(v));
}

void write_dht(std::vector<std::uint8_t>& out, int cls_id, const HuffSpec& s) {
  put_marker(out, 0xC4);
  put_u16(out, static_cast<int>(2 + 1 + 16 + s.vals.size()));
  out.push_back(static_cast<std::uint8_t>(cls_id));
  out.insert(out.end(), s.bits.begin(), s.bits.end());
  out.insert(out.end(), s.vals.begin(), s.vals.end());
}

std::vector<std::uint8_t> encode_components(int width, int height, int quality,
                                            std::vector<EncComponent>& comps,
                                            bool jfif) {
  if (width < 1 || height < 1 || width > 65535 || height > 65535) {
    throw InvalidArgument("JPEG dimensions must be in [1, 65535]");
  }
  const QuantTables tables = quality_to_tables(quality);
  const bool uses_chroma = std::any_of(comps.begin(), comps.end(), [](auto& c) {
    return c.cls == TableClass::kChroma;
  });
  const bool uses_luma = std::any_of(comps.begin(), comps.end(), [](auto& c) {
    return c.cls == TableClass::kLuma;
  });
  // Table slot 0 = luma class, slot 1 = chroma class, unless only chroma is
  // used, in which case it takes slot 0.
  auto slot = [&](TableClass c) {
    return (c == TableClass::kChroma && uses_luma) ? 1 : 0;
  };

  std::vector<std::uint8_t> out;
  out.reserve(1024);
  put_marker(out, 0xD8);
  if (jfif) {
    put_marker(out, 0xE0);
    put_u16(out, 16);
    for (char ch : {'J', 'F', 'I', 'F', '\0'}) out.push_back(static_cast<std::uint8_t>(ch));
    out.push_back(1);
    out.push_back(1);
    out.push_back(0);  // aspect ratio units
    put_u16(out, 1);
    put_u16(out, 1);
    out.push_back(0);
    out.push_back(0);
  }

  if (uses_luma) write_dqt(out, 0, tables.luma);
  if (uses_chroma) write_dqt(out, slot(TableClass::kChroma), tables.chroma);

  put_marker(out, 0xC0);
  put_u16(out, 8 + 3 * static_cast<int>(comps.size()));
  out.push_back(8);
  put_u16(out, height);
  put_u16(out, width);
  out.push_back(static_cast<std::uint8_t>(comps.size()));
  for (std::size_t i = 0; i < comps.size(); ++i) {
    out.push_back(static_cast<std::uint8_t>(i + 1));
    out.push_back(static_cast<std::uint8_t>((comps[i].h << 4) | comps[i].v));
    out.push_back(static_cast<std::uint8_t>(slot(comps[i].cls)));
  }

  if (uses_luma) {
    write_dht(out, 0x00, kDcLuma);
    write_dht(out, 0x10, kAcLuma);
  }
  if (uses_chroma) {
    const int s = slot(TableClass::kChroma);
    write_dht(out, 0x00 | s, kDcChroma);
    write_dht(out, 0x10 | s, kAcChroma);
  }

  put_marker(out, 0xDA);
  put_u16(out, 6 + 2 * static_cast<int>(comps.size()));
  out.push_back(static_cast<std::uint8_t>(comps.size()));
  for (std::size_t i = 0; i < comps.size(); ++i) {
    out.push_back(static_cast<std::uint8_t>(i + 1));
    const int s = slot(comps[i].cls);
    out.push_back(static_cast<std::uint8_t>((s << 4) | s));
  }
  out.push_back(0);
  out.push_back(63);
  out.push_back(0);

  static const HuffEncoder dc_luma = build_encoder(kDcLuma);
  static const HuffEncoder ac_luma = build_encoder(kAcLuma);
  static const HuffEncoder dc_chroma = build_encoder(kDcChroma);
  static const HuffEncoder ac_chroma = build_encoder(kAcChroma);

  int hmax = 1, vmax = 1;
  for (auto& c : comps) {
    hmax = std::max(hmax, c.h);
    vmax = std::max(vmax, c.v);
  }
  const int mcus_x = (width + 8 * hmax - 1) / (8 * hmax);
  const int mcus_y = (height + 8 * vmax - 1) / (8 * vmax);
  const bool interleaved = comps.size() > 1;

  BitWriter bw(out);
  if (interleaved) {
    for (int my = 0; my < mcus_y; ++my)
      for (int mx = 0; mx < mcus_x; ++mx)
        for (auto& c : comps) {
          const bool chroma = c.cls == TableClass::kChroma;
          const QuantTable& q = chroma ? tables.chroma : tables.luma;
          for (int by = 0; by < c.v; ++by)
            for (int bx = 0; bx < c.h; ++bx) {
              const auto zz =
                  quantize_block(c.plane, mx * c.h + bx, my * c.v + by, q);
              encode_block(bw, zz, c.pred, chroma ? dc_chroma : dc_luma,
                           chroma ? ac_chroma : ac_luma);
            }
        }
  } else {
    auto& c = comps.front();
    const bool chroma = c.cls == TableClass::kChroma;
    const QuantTable& q = chroma ? tables.chroma : tables.luma;
    const int bw_count = (c.plane.width + 7) / 8;
    const int bh_count = (c.plane.height + 7) / 8;
    for (int by = 0; by < bh_count; ++by)
      for (int bx = 0; bx < bw_count; ++bx) {
        const auto zz = quantize_block(c.plane, bx, by, q);
        encode_block(bw, zz, c.pred, chroma ? dc_chroma : dc_luma,
                     chroma ? ac_chroma : ac_luma);
      }
  }
  bw.flush();
  put_marker(out, 0xD9);
  return out;
}

PixelPlane downsample2x2(const PixelPlane& p) {
  PixelPlane out((p.width + 1) / 2, (p.height + 1) / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      const int x0 = 2 * x, y0 = 2 * y;
      const int x1 = std::min(x0 + 1, p.width - 1);
      const int y1 = std::min(y0 + 1, p.height - 1);
      out.at(x, y) =
          0.25 * (p.at(x0, y0) + p.at(x1, y0) + p.at(x0, y1) + p.at(x1, y1));
    }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_grey(const PixelPlane& plane, int quality,
                                      TableClass tables, bool jfif) {
  std::vector<EncComponent> comps(1);
  comps[0].plane = plane;
  comps[0].cls = tables;
  return encode_components(plane.width, plane.height, quality, comps, jfif);
}

std::vector<std::uint8_t> encode_color(const YCbCrImage& img, int quality,
                                       Subsampling sampling) {
  if (!img.y().same_shape(img.cb()) || !img.y().same_shape(img.cr())) {
    throw InvalidArgument("YCbCr planes differ in dimensions");
  }
  std::vector<EncComponent> comps(3);
  comps[0].plane = img.y();
  comps[1].cls = comps[2].cls = TableClass::kChroma;
  if (sampling == Subsampling::k420) {
    comps[0].h = comps[0].v = 2;
    comps[1].plane = downsample2x2(img.cb());
    comps[2].plane = downsample2x2(img.cr());
  } else {
    comps[1].plane = img.cb();
    comps[2].plane = img.cr();
  }
  return encode_components(img.width(), img.height(), quality, comps, true);
}

// ---------------------------------------------------------------------------
// Decoder

namespace {

struct HuffDecoder {
  bool present = false;
  std::array<std::int32_t, 18> maxcode{};
  std::array<std::int32_t, 17> valptr{};
  std::array<std::int32_t, 17> mincode{};
  std::array<std::uint8_t, 256> vals{};
};

struct FrameComponent {
  int id = 0;
  int h = 1;
  int v = 1;
  int tq = 0;
  int td = 0;
  int ta = 0;
  int pred = 0;
  int blocks_w = 0;  // blocks per line in the MCU-padded buffer
  int blocks_h = 0;
  int width = 0;  // component resolution
  int height = 0;
  bool scanned = false;
  std::vector<double> samples;  // blocks_w*8 x blocks_h*8
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }

  void need(std::size_t n, const char* field) const {
    if (remaining() < n) throw FormatError(field, pos_, "truncated stream");
  }
  std::uint8_t u8(const char* field) {
    need(1, field);
    return bytes_[pos_++];
  }
  int u16(const char* field) {
    need(2, field);
    const int v = (bytes_[pos_] << 8) | bytes_[pos_ + 1];
    pos_ += 2;
    return v;
  }
  void skip(std::size_t n, const char* field) {
    need(n, field);
    pos_ += n;
  }
  std::uint8_t peek(std::size_t ahead = 0) const { return bytes_[pos_ + ahead]; }
  std::span<const std::uint8_t> bytes() const { return bytes_; }
  void seek(std::size_t p) { pos_ = p; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Entropy-coded segment reader: unstuffs 0xFF00 and stops at markers.
class BitReader {
 public:
  explicit BitReader(ByteReader& r) : r_(r) {}

  int bit() {
    if (count_ == 0) fill();
    --count_;
    return (cur_ >> count_) & 1;
  }

  int bits(int n) {
    int v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | bit();
    return v;
  }

  // Discards buffered bits; positions the byte reader after the data.
  void align() { count_ = 0; }

 private:
  void fill() {
    const auto& bytes = r_.bytes();
    const std::size_t p = r_.pos();
    if (p >= bytes.size()) {
      throw FormatError("entropy data", p, "truncated entropy-coded data");
    }
    const std::uint8_t b = bytes[p];
    if (b == 0xFF) {
      if (p + 1 >= bytes.size()) {
        throw FormatError("entropy data", p, "truncated entropy-coded data");
      }
      if (bytes[p + 1] != 0x00) {
        throw FormatError("entropy data", p,
                          "marker inside entropy-coded data (truncated scan)");
      }
      r_.seek(p + 2);
    } else {
      r_.seek(p + 1);
    }
    cur_ = b;
    count_ = 8;
  }

  ByteReader& r_;
  int cur_ = 0;
  int count_ = 0;
};

int decode_huffman(BitReader& br, const HuffDecoder& t, std::size_t offset) {
  int code = br.bit();
  for (int len = 1; len <= 16; ++len) {
    if (t.maxcode[len] >= 0 && code <= t.maxcode[len]) {
      const int idx = t.valptr[len] + code - t.mincode[len];
      if (idx < 0 || idx > 255) break;
      return t.vals[idx];
    }
    code = (code << 1) | (len < 16 ? br.bit() : 0);
  }
  throw FormatError("huffman", offset, "invalid Huffman code");
}

int extend(int v, int s) { return v < (1 << (s - 1)) ? v - (1 << s) + 1 : v; }

void parse_dht(ByteReader& r, std::array<HuffDecoder, 4>& dc,
               std::array<HuffDecoder, 4>& ac) {
  const std::size_t start = r.pos();
  const int len = r.u16("DHT length");
  if (len < 2) throw FormatError("DHT length", start, "invalid segment length");
  r.need(static_cast<std::size_t>(len - 2), "DHT");
  const std::size_t end = start + static_cast<std::size_t>(len);
  while (r.pos() < end) {
    const std::size_t tpos = r.pos();
    const int tc_th = r.u8("DHT class");
    const int tc = tc_th >> 4, th = tc_th & 15;
    if (tc > 1 || th > 3) throw FormatError("DHT class", tpos, "bad table id");
    std::array<std::uint8_t, 16> bits{};
    int total = 0;
    for (int i = 0; i < 16; ++i) {
      bits[i] = r.u8("DHT counts");
      total += bits[i];
    }
    if (total > 256) throw FormatError("DHT counts", tpos, "more than 256 codes");
    if (r.pos() + static_cast<std::size_t>(total) > end) {
      throw FormatError("DHT length", tpos, "table overruns segment");
    }
    HuffDecoder t;
    t.present = true;
    for (int i = 0; i < total; ++i) t.vals[i] = r.u8("DHT values");
    std::int32_t code = 0;
    int k = 0;
    for (int l = 1; l <= 16; ++l) {
      if (bits[l - 1] == 0) {
        t.maxcode[l] = -1;
      } else {
        t.valptr[l] = k;
        t.mincode[l] = code;
        code += bits[l - 1];
        k += bits[l - 1];
        t.maxcode[l] = code - 1;
        if (code > (1 << l)) {
          throw FormatError("DHT counts", tpos, "over-subscribed code lengths");
        }
      }
      code <<= 1;
    }
    t.maxcode[17] = -1;
    (tc == 0 ? dc : ac)[th] = t;
  }
  if (r.pos() != end) throw FormatError("DHT length", start, "length mismatch");
}

void parse_dqt(ByteReader& r, std::array<QuantTable, 4>& q,
               std::array<bool, 4>& have) {
  const std::size_t start = r.pos();
  const int len = r.u16("DQT length");
  if (len < 2) throw FormatError("DQT length", start, "invalid segment length");
  r.need(static_cast<std::size_t>(len - 2), "DQT");
  const std::size_t end = start + static_cast<std::size_t>(len);
  while (r.pos() < end) {
    const std::size_t tpos = r.pos();
    const int pq_tq = r.u8("DQT id");
    const int pq = pq_tq >> 4, tq = pq_tq & 15;
    if (pq > 1 || tq > 3) throw FormatError("DQT id", tpos, "bad table id");
    const std::size_t size = pq ? 128 : 64;
    if (r.pos() + size > end) throw FormatError("DQT length", tpos, "table overruns segment");
    for (int k = 0; k < 64; ++k) {
      const int v = pq ? r.u16("DQT values") : r.u8("DQT values");
      if (v == 0) throw FormatError("DQT values", tpos, "zero divisor");
      q[tq][k] = static_cast<std::uint16_t>(v);
    }
    have[tq] = true;
  }
  if (r.pos() != end) throw FormatError("DQT length", start, "length mismatch");
}

void decode_block_into(BitReader& br, std::size_t offset, FrameComponent& c,
                       const HuffDecoder& dc, const HuffDecoder& ac,
                       const QuantTable& q, int bx, int by) {
  Block coeffs{};
  const int t = decode_huffman(br, dc, offset);
  if (t > 11) throw FormatError("huffman", offset, "DC magnitude category > 11");
  const int diff = t ? extend(br.bits(t), t) : 0;
  c.pred += diff;
  coeffs[0] = static_cast<double>(c.pred) * q[0];
  for (int k = 1; k < 64;) {
    const int rs = decode_huffman(br, ac, offset);
    const int run = rs >> 4, s = rs & 15;
    if (s == 0) {
      if (run == 15) {
        k += 16;
        continue;
      }
      break;
    }
    k += run;
    if (k > 63) throw FormatError("huffman", offset, "AC coefficient index overrun");
    coeffs[kZigZagToNatural[k]] = static_cast<double>(extend(br.bits(s), s)) * q[k];
    ++k;
  }
  const Block px = idct8x8(coeffs);
  const int stride = c.blocks_w * 8;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      c.samples[static_cast<std::size_t>(by * 8 + y) * stride + bx * 8 + x] =
          static_cast<double>(quantize_sample(px[y * 8 + x] + 128.0));
    }
}

// Centred linear interpolation for factors of 2 (3/4, 1/4 weights), sample
// replication for larger factors.
PixelPlane upsample(const PixelPlane& p, int fx, int fy, int w, int h) {
  PixelPlane out(w, h);
  const bool linear = fx <= 2 && fy <= 2;
  auto at = [&](int xx, int yy) {
    return p.at(std::clamp(xx, 0, p.width - 1), std::clamp(yy, 0, p.height - 1));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v;
      if (linear) {
        const double sx = (x + 0.5) / fx - 0.5;
        const double sy = (y + 0.5) / fy - 0.5;
        const int x0 = static_cast<int>(std::floor(sx));
        const int y0 = static_cast<int>(std::floor(sy));
        const double ax = sx - x0, ay = sy - y0;
        v = (1 - ay) * ((1 - ax) * at(x0, y0) + ax * at(x0 + 1, y0)) +
            ay * ((1 - ax) * at(x0, y0 + 1) + ax * at(x0 + 1, y0 + 1));
      } else {
        v = at(x / fx, y / fy);
      }
      out.at(x, y) = static_cast<double>(quantize_sample(v));
    }
  }
  return out;
}

}  // namespace

Decoded decode(std::span<const std::uint8_t> stream) {
  ByteReader r(stream);
  if (r.remaining() < 2 || r.peek() != 0xFF || r.peek(1) != 0xD8) {
    throw FormatError("SOI", 0, "missing start-of-image marker");
  }
  r.skip(2, "SOI");

  std::array<QuantTable, 4> qt{};
  std::array<bool, 4> have_qt{};
  std::array<HuffDecoder, 4> dc{}, ac{};
  std::vector<FrameComponent> comps;
  int width = 0, height = 0, hmax = 1, vmax = 1, mcus_x = 0, mcus_y = 0;
  int restart_interval = 0;
  bool frame = false;

  for (;;) {
    const std::size_t mpos = r.pos();
    if (r.at_end()) throw FormatError("EOI", mpos, "truncated stream (no EOI)");
    if (r.u8("marker") != 0xFF) {
      throw FormatError("marker", mpos, "expected marker");
    }
    std::uint8_t m = r.u8("marker");
    while (m == 0xFF) m = r.u8("marker");

    if (m == 0xD9) break;  // EOI
    switch (m) {
      case 0xC4:
        parse_dht(r, dc, ac);
        break;
      case 0xDB:
        parse_dqt(r, qt, have_qt);
        break;
      case 0xDD: {
        const int len = r.u16("DRI length");
        if (len != 4) throw FormatError("DRI length", mpos, "expected 4");
        restart_interval = r.u16("DRI interval");
        break;
      }
      case 0xC0:
      case 0xC1: {
        if (frame) throw FormatError("SOF", mpos, "multiple frames");
        const std::size_t start = r.pos();
        const int len = r.u16("SOF length");
        const int precision = r.u8("SOF precision");
        if (precision != 8) throw FormatError("SOF precision", mpos, "only 8-bit supported");
        height = r.u16("SOF height");
        width = r.u16("SOF width");
        const int nc = r.u8("SOF components");
        if (width == 0 || height == 0) {
          throw FormatError("SOF dimensions", mpos, "zero width or height");
        }
        if (nc < 1 || nc > 4 || len != 8 + 3 * nc) {
          throw FormatError("SOF components", mpos, "bad component count");
        }
        comps.resize(static_cast<std::size_t>(nc));
        for (auto& c : comps) {
          c.id = r.u8("SOF component id");
          const int hv = r.u8("SOF sampling");
          c.h = hv >> 4;
          c.v = hv & 15;
          c.tq = r.u8("SOF table");
          if (c.h < 1 || c.h > 4 || c.v < 1 || c.v > 4 || c.tq > 3) {
            throw FormatError("SOF sampling", mpos, "bad sampling or table id");
          }
          hmax = std::max(hmax, c.h);
          vmax = std::max(vmax, c.v);
        }
        mcus_x = (width + 8 * hmax - 1) / (8 * hmax);
        mcus_y = (height + 8 * vmax - 1) / (8 * vmax);
        // Every block costs at least two bits of entropy data; refuse frames
        // the rest of the stream cannot possibly describe.
        std::size_t total_blocks = 0;
        for (auto& c : comps) {
          c.blocks_w = mcus_x * c.h;
          c.blocks_h = mcus_y * c.v;
          c.width = (width * c.h + hmax - 1) / hmax;
          c.height = (height * c.v + vmax - 1) / vmax;
          total_blocks += static_cast<std::size_t>(c.blocks_w) * c.blocks_h;
        }
        if (total_blocks > 4 * r.remaining() + 64) {
          throw FormatError("SOF dimensions", start,
                            "frame larger than the remaining stream can encode");
        }
        for (auto& c : comps) {
          c.samples.assign(static_cast<std::size_t>(c.blocks_w) * c.blocks_h * 64, 0.0);
        }
        frame = true;
        break;
      }
      case 0xDA: {
        if (!frame) throw FormatError("SOS", mpos, "scan before frame header");
        const int len = r.u16("SOS length");
        const int ns = r.u8("SOS components");
        if (ns < 1 || ns > 4 || len != 6 + 2 * ns) {
          throw FormatError("SOS components", mpos, "bad scan component count");
        }
        std::vector<FrameComponent*> scan;
        for (int i = 0; i < ns; ++i) {
          const int id = r.u8("SOS component id");
          const int tables = r.u8("SOS tables");
          auto it = std::find_if(comps.begin(), comps.end(),
                                 [id](const FrameComponent& c) { return c.id == id; });
          if (it == comps.end()) throw FormatError("SOS component id", mpos, "unknown component");
          it->td = tables >> 4;
          it->ta = tables & 15;
          if (it->td > 3 || it->ta > 3 || !dc[it->td].present || !ac[it->ta].present) {
            throw FormatError("SOS tables", mpos, "undefined Huffman table");
          }
          if (!have_qt[it->tq]) throw FormatError("SOS tables", mpos, "undefined quantization table");
          if (std::find(scan.begin(), scan.end(), &*it) != scan.end()) {
            throw FormatError("SOS component id", mpos, "duplicate component");
          }
          scan.push_back(&*it);
        }
        const int ss = r.u8("SOS spectral start");
        const int se = r.u8("SOS spectral end");
        const int ah_al = r.u8("SOS approximation");
        if (ss != 0 || se != 63 || ah_al != 0) {
          throw FormatError("SOS spectral", mpos, "not a baseline sequential scan");
        }
        for (auto* c : scan) {
          c->pred = 0;
          c->scanned = true;
        }

        BitReader br(r);
        const std::size_t data_start = r.pos();
        int units_done = 0;
        auto maybe_restart = [&](int total_units) {
          ++units_done;
          if (restart_interval == 0 || units_done % restart_interval != 0 ||
              units_done == total_units) {
            return;
          }
          br.align();
          const std::size_t p = r.pos();
          if (r.remaining() < 2 || r.peek() != 0xFF || (r.peek(1) & 0xF8) != 0xD0) {
            throw FormatError("RST", p, "expected restart marker");
          }
          r.skip(2, "RST");
          for (auto* c : scan) c->pred = 0;
        };

        if (scan.size() == 1) {
          FrameComponent& c = *scan[0];
          const int bw = (c.width + 7) / 8, bh = (c.height + 7) / 8;
          for (int by = 0; by < bh; ++by)
            for (int bx = 0; bx < bw; ++bx) {
              decode_block_into(br, data_start, c, dc[c.td], ac[c.ta], qt[c.tq], bx, by);
              maybe_restart(bw * bh);
            }
        } else {
          for (int my = 0; my < mcus_y; ++my)
            for (int mx = 0; mx < mcus_x; ++mx) {
              for (auto* c : scan)
                for (int by = 0; by < c->v; ++by)
                  for (int bx = 0; bx < c->h; ++bx)
                    decode_block_into(br, data_start, *c, dc[c->td], ac[c->ta],
                                      qt[c->tq], mx * c->h + bx, my * c->v + by);
              maybe_restart(mcus_x * mcus_y);
            }
        }
        br.align();
        break;
      }
      case 0xC2: case 0xC3: case 0xC5: case 0xC6: case 0xC7: case 0xC9:
      case 0xCA: case 0xCB: case 0xCD: case 0xCE: case 0xCF:
        throw FormatError("SOF", mpos, "unsupported JPEG process (not baseline)");
      default: {
        if ((m >= 0xE0 && m <= 0xEF) || m == 0xFE) {
          const int len = r.u16("segment length");
          if (len < 2) throw FormatError("segment length", mpos, "invalid length");
          r.skip(static_cast<std::size_t>(len - 2), "segment");
        } else {
          throw FormatError("marker", mpos, "unexpected marker");
        }
      }
    }
  }

  if (!frame) throw FormatError("SOF", r.pos(), "no frame header before EOI");
  Decoded out;
  out.width = width;
  out.height = height;
  for (auto& c : comps) {
    if (!c.scanned) throw FormatError("SOS", r.pos(), "component never scanned");
    PixelPlane plane(c.width, c.height);
    const int stride = c.blocks_w * 8;
    for (int y = 0; y < c.height; ++y)
      for (int x = 0; x < c.width; ++x)
        plane.at(x, y) = c.samples[static_cast<std::size_t>(y) * stride + x];
    if (c.h == hmax && c.v == vmax) {
      out.components.push_back(std::move(plane));
    } else {
      const int fx = hmax / c.h, fy = vmax / c.v;
      if (hmax % c.h != 0 || vmax % c.v != 0) {
        throw FormatError("SOF sampling", 0, "non-integral sampling ratio");
      }
      out.components.push_back(upsample(plane, fx, fy, width, height));
    }
  }
  return out;
}

YCbCrImage decode_color(std::span<const std::uint8_t> stream) {
  Decoded d = decode(stream);
  if (d.components.size() != 3) {
    throw FormatError("SOF components", 0, "expected a 3-component stream");
  }
  return YCbCrImage{{std::move(d.components[0]), std::move(d.components[1]),
                     std::move(d.components[2])}};
}

PixelPlane decode_grey(std::span<const std::uint8_t> stream) {
  Decoded d = decode(stream);
  if (d.components.size() != 1) {
    throw FormatError("SOF components", 0, "expected a 1-component stream");
  }
  return std::move(d.components[0]);
}

}  // namespace beed::jpeg
