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

// Adaptive binary arithmetic coder for block masks.
//
// One context with bit counts starting at (1, 1), incremented after every
// coded bit and halved (minimum 1) once their sum reaches 2^16. The coder is
// a 32-bit integer range coder with MSB renormalization and underflow
// (pending bit) handling. The encoder flushes enough bits that the decoder
// never reads past the end of the stream, so truncation is detectable.
namespace beed::arith {

std::vector<std::uint8_t> encode(const std::vector<bool>& bits);

// Decodes exactly `count` bits. Throws FormatError when the stream is
// truncated or carries more than the final padding byte.
std::vector<bool> decode(std::span<const std::uint8_t> bytes, std::size_t count);

}  // namespace beed::arith
