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

#include <functional>
#include <vector>

namespace beed {

struct GoldenSample {
  double x = 0.0;
  double f = 0.0;
};

struct GoldenResult {
  double argmin = 0.0;     // midpoint of the final bracket
  double lo = 0.0;         // final bracket
  double hi = 0.0;
  GoldenSample best;       // lowest evaluated point (first wins ties)
  std::vector<GoldenSample> trace;  // every evaluation in order
};

inline constexpr double kGoldenRatio = 0.6180339887498949;  // (sqrt(5) - 1) / 2

// Golden-section minimization using exactly `evals` evaluations of `f`.
// Throws InvalidArgument unless lo < hi and evals >= 4.
GoldenResult golden_section(const std::function<double(double)>& f, double lo,
                            double hi, int evals);

}  // namespace beed
