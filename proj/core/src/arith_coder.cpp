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

#include "beed/arith_coder.hpp"

#include <algorithm>

#include "beed/errors.hpp"

namespace beed::arith {
namespace {

constexpr std::uint64_t kTop = 0xFFFFFFFFull;
constexpr std::uint64_t kHalf = 0x80000000ull;
constexpr std::uint64_t kQuarter = 0x40000000ull;
constexpr std::uint32_t kMaxTotal = 1u << 16;

class Model {
 public:
  std::uint32_t zeros() const { return c0_; }
  std::uint32_t total() const { return c0_ + c1_; }

  void update(bool bit) {
    (bit ? c1_ : c0_) += 1;
    if (c0_ + c1_ >= kMaxTotal) {
      c0_ = std::max(1u, c0_ / 2);
      c1_ = std::max(1u, c1_ / 2);
    }
  }

 private:
  std::uint32_t c0_ = 1;
  std::uint32_t c1_ = 1;
};

// Split point of [low, high] for the zero symbol.
inline std::uint64_t split(std::uint64_t low, std::uint64_t high, const Model& m) {
  const std::uint64_t range = high - low + 1;
  return low + range * m.zeros() / m.total();
}

class BitSink {
 public:
  void put(bool bit) {
    acc_ = static_cast<std::uint8_t>((acc_ << 1) | (bit ? 1 : 0));
    if (++n_ == 8) {
      out_.push_back(acc_);
      acc_ = 0;
      n_ = 0;
    }
  }
  void put_with_pending(bool bit, std::uint64_t& pending) {
    put(bit);
    for (; pending > 0; --pending) put(!bit);
  }
  std::vector<std::uint8_t> finish() {
    while (n_ != 0) put(false);
    return std::move(out_);
  }

 private:
  std::vector<std::uint8_t> out_;
  std::uint8_t acc_ = 0;
  int n_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode(const std::vector<bool>& bits) {
  std::uint64_t low = 0, high = kTop, pending = 0;
  Model model;
  BitSink sink;
  for (bool bit : bits) {
    const std::uint64_t mid = split(low, high, model);
    if (bit) {
      low = mid;
    } else {
      high = mid - 1;
    }
    model.update(bit);
    for (;;) {
      if (high < kHalf) {
        sink.put_with_pending(false, pending);
      } else if (low >= kHalf) {
        sink.put_with_pending(true, pending);
        low -= kHalf;
        high -= kHalf;
      } else if (low >= kQuarter && high < kHalf + kQuarter) {
        ++pending;
        low -= kQuarter;
        high -= kQuarter;
      } else {
        break;
      }
      low = 2 * low;
      high = 2 * high + 1;
    }
  }
  // Two bits select a point inside [low, high]; the remaining 30 zero bits
  // fill the decoder's 32-bit window.
  ++pending;
  sink.put_with_pending(low >= kQuarter, pending);
  for (int i = 0; i < 30; ++i) sink.put(false);
  return sink.finish();
}

std::vector<bool> decode(std::span<const std::uint8_t> bytes, std::size_t count) {
  std::size_t bitpos = 0;
  const std::size_t nbits = bytes.size() * 8;
  auto next = [&]() -> std::uint64_t {
    if (bitpos >= nbits) {
      throw FormatError("coded mask", bytes.size(), "truncated arithmetic-coded data");
    }
    const std::uint64_t b = (bytes[bitpos / 8] >> (7 - bitpos % 8)) & 1u;
    ++bitpos;
    return b;
  };

  std::uint64_t low = 0, high = kTop, value = 0;
  for (int i = 0; i < 32; ++i) value = (value << 1) | next();
  Model model;
  std::vector<bool> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const std::uint64_t mid = split(low, high, model);
    const bool bit = value >= mid;
    if (bit) {
      low = mid;
    } else {
      high = mid - 1;
    }
    out.push_back(bit);
    model.update(bit);
    for (;;) {
      if (high < kHalf) {
        // nothing to subtract
      } else if (low >= kHalf) {
        low -= kHalf;
        high -= kHalf;
        value -= kHalf;
      } else if (low >= kQuarter && high < kHalf + kQuarter) {
        low -= kQuarter;
        high -= kQuarter;
        value -= kQuarter;
      } else {
        break;
      }
      low = 2 * low;
      high = 2 * high + 1;
      value = (value << 1) | next();
    }
  }
  if (nbits - bitpos >= 8) {
    throw FormatError("coded mask", (bitpos + 7) / 8,
                      "trailing bytes after arithmetic-coded data");
  }
  return out;
}

}  // namespace beed::arith
