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

#include "beed/ppm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "beed/errors.hpp"

namespace beed {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  int read_int(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1 << 24) throw FormatError(field, start, "value too large");
      ++pos_;
    }
    if (pos_ == start) throw FormatError(field, start, "expected integer");
    return static_cast<int>(v);
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

PnmImage decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw FormatError("magic", 0, "not a binary PGM/PPM (P5/P6) file");
  }
  const bool grey = bytes[1] == '5';
  HeaderReader hr(bytes);
  hr.advance();
  hr.advance();
  const int w = hr.read_int("width");
  const int h = hr.read_int("height");
  const int maxval = hr.read_int("maxval");
  if (w <= 0 || h <= 0) throw FormatError("width", 2, "empty image");
  if (maxval != 255) throw FormatError("maxval", hr.pos(), "only 8-bit supported");
  // Exactly one whitespace byte separates the header from the raster.
  if (hr.pos() >= bytes.size() || !std::isspace(bytes[hr.pos()])) {
    throw FormatError("raster", hr.pos(), "missing header terminator");
  }
  std::size_t pos = hr.pos() + 1;
  const int ch = grey ? 1 : 3;
  const std::size_t need = static_cast<std::size_t>(w) * h * ch;
  if (bytes.size() - pos < need) throw FormatError("raster", pos, "truncated");

  PnmImage out;
  out.grey = grey;
  for (auto& p : out.rgb.channels) p = PixelPlane(w, h);
  for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
    for (int c = 0; c < 3; ++c) {
      out.rgb.channels[c].samples[i] = bytes[pos + (grey ? 0 : c)];
    }
    pos += ch;
  }
  return out;
}

PnmImage read_pnm(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_pnm(bytes);
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
  const std::string header = "P6\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.r().size() * 3);
  for (std::size_t i = 0; i < img.r().size(); ++i)
    for (const auto& p : img.channels) out.push_back(quantize_sample(p.samples[i]));
  return out;
}

std::vector<std::uint8_t> encode_pgm(const PixelPlane& plane) {
  const std::string header = "P5\n" + std::to_string(plane.width) + " " +
                             std::to_string(plane.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (double v : plane.samples) out.push_back(quantize_sample(v));
  return out;
}

void write_ppm(const std::filesystem::path& path, const RgbImage& img) {
  write_file(path, encode_ppm(img));
}

void write_pgm(const std::filesystem::path& path, const PixelPlane& plane) {
  write_file(path, encode_pgm(plane));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace beed
