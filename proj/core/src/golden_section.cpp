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

#include "beed/golden_section.hpp"

#include <cmath>

#include "beed/errors.hpp"

namespace beed {

GoldenResult golden_section(const std::function<double(double)>& f, double lo,
                            double hi, int evals) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("golden_section needs a finite bracket with lo < hi");
  }
  if (evals < 4) throw InvalidArgument("golden_section needs at least 4 evaluations");

  GoldenResult r;
  r.trace.reserve(static_cast<std::size_t>(evals));
  auto eval = [&](double x) {
    const double v = f(x);
    r.trace.push_back({x, v});
    if (r.trace.size() == 1 || v < r.best.f) r.best = {x, v};
    return v;
  };

  double a = lo;
  double b = hi;
  double x1 = b - kGoldenRatio * (b - a);
  double x2 = a + kGoldenRatio * (b - a);
  double f1 = eval(x1);
  double f2 = eval(x2);
  for (int n = 2; n < evals; ++n) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGoldenRatio * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGoldenRatio * (b - a);
      f2 = eval(x2);
    }
  }
  // Shrink once more using the two interior values; no extra evaluation.
  if (f1 <= f2) {
    b = x2;
  } else {
    a = x1;
  }
  r.lo = a;
  r.hi = b;
  r.argmin = 0.5 * (a + b);
  return r;
}

}  // namespace beed
