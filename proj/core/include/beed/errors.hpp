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
#include <stdexcept>
#include <string>

namespace beed {

// Precondition violations on API inputs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or truncated byte streams (JPEG, coded masks, containers).
// `field` names the offending header field or marker; `offset` is the byte
// position at which the problem was detected.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string field, std::size_t offset, const std::string& what)
      : std::runtime_error(field + " at byte " + std::to_string(offset) + ": " +
                           what),
        field_(std::move(field)),
        offset_(offset) {}

  const std::string& field() const { return field_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string field_;
  std::size_t offset_;
};

// The requested compression ratio cannot be met by any configuration.
class UnattainableTarget : public std::runtime_error {
 public:
  UnattainableTarget(double requested, double closest)
      : std::runtime_error("target ratio " + std::to_string(requested) +
                           ":1 is unattainable; closest achievable is " +
                           std::to_string(closest) + ":1"),
        requested_(requested),
        closest_(closest) {}

  double requested() const { return requested_; }
  double closest() const { return closest_; }

 private:
  double requested_;
  double closest_;
};

}  // namespace beed
