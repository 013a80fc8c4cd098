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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace beed::testing {

PixelPlane random_plane(std::mt19937_64& rng, int w, int h, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  PixelPlane p(w, h);
  for (double& v : p.samples) v = d(rng);
  return p;
}

PixelMask random_mask(std::mt19937_64& rng, int w, int h, double p_known) {
  std::bernoulli_distribution d(p_known);
  PixelMask m(w, h);
  for (auto& k : m.known) k = d(rng) ? 1 : 0;
  return m;
}

namespace {

double basis(int k, int n) {
  const double c = k == 0 ? std::sqrt(0.125) : 0.5;
  return c * std::cos((2 * n + 1) * k * std::numbers::pi / 16.0);
}

}  // namespace

std::vector<double> dct_by_matrix(const std::vector<double>& tile) {
  std::vector<double> out(64, 0.0);
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      long double s = 0.0;
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) s += tile[y * 8 + x] * basis(u, x) * basis(v, y);
      out[v * 8 + u] = static_cast<double>(s);
    }
  return out;
}

std::vector<double> idct_by_matrix(const std::vector<double>& coeffs) {
  std::vector<double> out(64, 0.0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      long double s = 0.0;
      for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) s += coeffs[v * 8 + u] * basis(u, x) * basis(v, y);
      out[y * 8 + x] = static_cast<double>(s);
    }
  return out;
}

std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b, int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (a[piv * n + col] == 0.0) throw std::runtime_error("singular system");
    if (piv != col) {
      for (int k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (int k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
    x[r] = s / a[r * n + r];
  }
  return x;
}

PixelPlane dense_inpaint(const PixelPlane& init, const PixelMask& mask,
                         const eed::TensorField& f) {
  const int w = init.width, h = init.height, n = w * h;
  // Edge list (i, j, weight) of the energy
  //   sum over cells (a-|b|)/2 [dx^2 top + dx^2 bottom] + (c-|b|)/2 [dy^2 left + dy^2 right]
  //   + (|b|+b)/2 (u11-u00)^2 + (|b|-b)/2 (u10-u01)^2
  // with |b| limited to min(a, c) so that every weight is non-negative.
  struct Edge {
    int i, j;
    double w;
  };
  std::vector<Edge> edges;
  auto id = [w](int x, int y) { return y * w + x; };
  for (int y = 0; y + 1 < h; ++y)
    for (int x = 0; x + 1 < w; ++x) {
      const int p00 = id(x, y), p10 = id(x + 1, y), p01 = id(x, y + 1), p11 = id(x + 1, y + 1);
      const double a = (f.a[p00] + f.a[p10] + f.a[p01] + f.a[p11]) / 4.0;
      const double b = (f.b[p00] + f.b[p10] + f.b[p01] + f.b[p11]) / 4.0;
      const double c = (f.c[p00] + f.c[p10] + f.c[p01] + f.c[p11]) / 4.0;
      const double ab = std::min({std::abs(b), a, c});
      const double bc = b < 0 ? -ab : ab;
      edges.push_back({p00, p10, (a - ab) / 2.0});
      edges.push_back({p01, p11, (a - ab) / 2.0});
      edges.push_back({p00, p01, (c - ab) / 2.0});
      edges.push_back({p10, p11, (c - ab) / 2.0});
      edges.push_back({p00, p11, (ab + bc) / 2.0});
      edges.push_back({p10, p01, (ab - bc) / 2.0});
    }
  std::vector<double> lap(static_cast<std::size_t>(n) * n, 0.0);
  for (const Edge& e : edges) {
    lap[e.i * n + e.i] += e.w;
    lap[e.j * n + e.j] += e.w;
    lap[e.i * n + e.j] -= e.w;
    lap[e.j * n + e.i] -= e.w;
  }
  // Known rows become identity rows.
  std::vector<double> rhs(n, 0.0);
  for (int p = 0; p < n; ++p) {
    if (mask.known[p]) {
      for (int k = 0; k < n; ++k) lap[p * n + k] = 0.0;
      lap[p * n + p] = 1.0;
      rhs[p] = init.samples[p];
    }
  }
  const auto x = dense_solve(std::move(lap), std::move(rhs), n);
  PixelPlane out(w, h);
  out.samples = x;
  return out;
}

PixelPlane gaussian_direct(const PixelPlane& plane, double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  const int w = plane.width, h = plane.height;
  auto mirror = [](int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
  };
  double norm = 0.0;
  for (int j = -r; j <= r; ++j)
    for (int i = -r; i <= r; ++i) norm += std::exp(-(i * i + j * j) / (2.0 * sigma * sigma));
  PixelPlane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int j = -r; j <= r; ++j)
        for (int i = -r; i <= r; ++i)
          s += std::exp(-(i * i + j * j) / (2.0 * sigma * sigma)) *
               plane.at(mirror(x + i, w), mirror(y + j, h));
      out.at(x, y) = s / norm;
    }
  return out;
}

double reference_mse(const std::vector<const PixelPlane*>& a,
                     const std::vector<const PixelPlane*>& b) {
  long double s = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < a.size(); ++c)
    for (int y = 0; y < a[c]->height; ++y)
      for (int x = 0; x < a[c]->width; ++x) {
        const long double d = static_cast<long double>(a[c]->at(x, y)) - b[c]->at(x, y);
        s += d * d;
        ++count;
      }
  return static_cast<double>(s / count);
}

}  // namespace beed::testing
