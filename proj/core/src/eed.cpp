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

#include "beed/eed.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "beed/errors.hpp"

namespace beed::eed {

void validate(const EEDParams& p) {
  if (!(std::isfinite(p.sigma) && p.sigma > 0.0) ||
      !(std::isfinite(p.lambda) && p.lambda > 0.0)) {
    throw InvalidArgument("EED parameters must be finite and positive");
  }
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.residual_tol > 0.0) || cfg.max_outer < 1 || cfg.max_inner < 1 ||
      cfg.tensor_refresh < 1) {
    throw InvalidArgument("invalid solver configuration");
  }
}

TensorField::TensorField(int w, int h)
    : width(w),
      height(h),
      a(static_cast<std::size_t>(w) * h, 0.0),
      b(static_cast<std::size_t>(w) * h, 0.0),
      c(static_cast<std::size_t>(w) * h, 0.0) {}

TensorField TensorField::identity(int w, int h) {
  TensorField f(w, h);
  std::fill(f.a.begin(), f.a.end(), 1.0);
  std::fill(f.c.begin(), f.c.end(), 1.0);
  return f;
}

namespace {

// Half-sample symmetric extension: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
int reflect(int i, int n) {
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace

PixelPlane gaussian_smooth(const PixelPlane& plane, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("Gaussian sigma must be non-negative");
  }
  if (sigma == 0.0 || plane.size() == 0) return plane;

  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(radius) + 1);
  double sum = 0.0;
  for (int k = 0; k <= radius; ++k) {
    kernel[k] = std::exp(-static_cast<double>(k) * k / (2.0 * sigma * sigma));
    sum += k == 0 ? kernel[k] : 2.0 * kernel[k];
  }
  for (double& v : kernel) v /= sum;

  const int w = plane.width, h = plane.height;
  PixelPlane tmp(w, h), out(w, h);
  std::vector<double> line;
  line.resize(static_cast<std::size_t>(std::max(w, h)) + 2 * radius);
  for (int y = 0; y < h; ++y) {
    for (int i = -radius; i < w + radius; ++i)
      line[i + radius] = plane.at(reflect(i, w), y);
    for (int x = 0; x < w; ++x) {
      const double* l = &line[x + radius];
      double s = kernel[0] * l[0];
      for (int k = 1; k <= radius; ++k) s += kernel[k] * (l[k] + l[-k]);
      tmp.at(x, y) = s;
    }
  }
  for (int x = 0; x < w; ++x) {
    for (int i = -radius; i < h + radius; ++i)
      line[i + radius] = tmp.at(x, reflect(i, h));
    for (int y = 0; y < h; ++y) {
      const double* l = &line[y + radius];
      double s = kernel[0] * l[0];
      for (int k = 1; k <= radius; ++k) s += kernel[k] * (l[k] + l[-k]);
      out.at(x, y) = s;
    }
  }
  return out;
}

double charbonnier(double s2, double lambda) {
  return 1.0 / std::sqrt(1.0 + s2 / (lambda * lambda));
}

TensorField diffusion_tensor(const PixelPlane& plane, const EEDParams& params) {
  validate(params);
  const PixelPlane us = gaussian_smooth(plane, params.sigma);
  const int w = plane.width, h = plane.height;
  TensorField f(w, h);
  for (int y = 0; y < h; ++y) {
    const int yp = reflect(y + 1, h), ym = reflect(y - 1, h);
    for (int x = 0; x < w; ++x) {
      const int xp = reflect(x + 1, w), xm = reflect(x - 1, w);
      const double gx = 0.5 * (us.at(xp, y) - us.at(xm, y));
      const double gy = 0.5 * (us.at(x, yp) - us.at(x, ym));
      const double s2 = gx * gx + gy * gy;
      const std::size_t i = plane.index(x, y);
      if (std::sqrt(s2) < kGradientEpsilon) {
        f.a[i] = 1.0;
        f.b[i] = 0.0;
        f.c[i] = 1.0;
        continue;
      }
      // D = g v1 v1^T + v2 v2^T = I + (g - 1) v1 v1^T
      const double g = charbonnier(s2, params.lambda);
      const double n = std::sqrt(s2);
      const double vx = gx / n, vy = gy / n;
      f.a[i] = 1.0 + (g - 1.0) * vx * vx;
      f.b[i] = (g - 1.0) * vx * vy;
      f.c[i] = 1.0 + (g - 1.0) * vy * vy;
    }
  }
  return f;
}

PixelPlane initial_guess(const PixelPlane& init, const PixelMask& mask) {
  struct Level {
    int w, h;
    std::vector<double> value, weight;
  };
  std::vector<Level> levels;
  Level base{init.width, init.height, init.samples,
             std::vector<double>(init.size(), 0.0)};
  for (std::size_t i = 0; i < init.size(); ++i) {
    base.weight[i] = mask.known[i] ? 1.0 : 0.0;
    if (!mask.known[i]) base.value[i] = 0.0;
  }
  levels.push_back(std::move(base));

  // push: weighted 2x2 averages until a single pixel remains
  while (levels.back().w > 1 || levels.back().h > 1) {
    const Level& f = levels.back();
    Level c{(f.w + 1) / 2, (f.h + 1) / 2, {}, {}};
    c.value.assign(static_cast<std::size_t>(c.w) * c.h, 0.0);
    c.weight.assign(c.value.size(), 0.0);
    for (int y = 0; y < f.h; ++y)
      for (int x = 0; x < f.w; ++x) {
        const std::size_t fi = static_cast<std::size_t>(y) * f.w + x;
        const std::size_t ci = static_cast<std::size_t>(y / 2) * c.w + x / 2;
        c.value[ci] += f.weight[fi] * f.value[fi];
        c.weight[ci] += f.weight[fi];
      }
    for (std::size_t i = 0; i < c.value.size(); ++i)
      if (c.weight[i] > 0.0) c.value[i] /= c.weight[i];
    levels.push_back(std::move(c));
  }

  // pull: fill empty pixels by bilinear interpolation from the coarser level
  for (std::size_t l = levels.size() - 1; l-- > 0;) {
    Level& f = levels[l];
    const Level& c = levels[l + 1];
    auto at = [&](int x, int y) {
      x = std::clamp(x, 0, c.w - 1);
      y = std::clamp(y, 0, c.h - 1);
      return c.value[static_cast<std::size_t>(y) * c.w + x];
    };
    for (int y = 0; y < f.h; ++y)
      for (int x = 0; x < f.w; ++x) {
        const std::size_t fi = static_cast<std::size_t>(y) * f.w + x;
        if (f.weight[fi] > 0.0) continue;
        const double sx = (x + 0.5) / 2.0 - 0.5, sy = (y + 0.5) / 2.0 - 0.5;
        const int x0 = static_cast<int>(std::floor(sx));
        const int y0 = static_cast<int>(std::floor(sy));
        const double ax = sx - x0, ay = sy - y0;
        f.value[fi] = (1 - ay) * ((1 - ax) * at(x0, y0) + ax * at(x0 + 1, y0)) +
                      ay * ((1 - ax) * at(x0, y0 + 1) + ax * at(x0 + 1, y0 + 1));
      }
  }

  PixelPlane out = init;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!mask.known[i]) out.samples[i] = levels[0].value[i];
  return out;
}

namespace {

// Stencil weights of the discrete operator on a grid padded by one pixel on
// every side. Each weight couples a pixel with one forward neighbour; the
// backward couplings are read from the neighbour's entry, so the operator is
// symmetric by construction.
//
// The tensor is averaged onto the cell centres (x + 1/2, y + 1/2). Per cell,
//   grad u^T D grad u = (a - |b|) u_x^2 + (c - |b|) u_y^2
//                     + (|b| + b)/2 (u_x + u_y)^2 + (|b| - b)/2 (u_x - u_y)^2
// with u_x, u_y taken on the two horizontal / vertical cell edges and the
// mixed directions on the cell diagonals. |b| is limited to min(a, c) per
// cell, which keeps every weight non-negative (discrete max-min principle)
// and the cell tensor positive semidefinite. Only cells inside the image
// contribute (reflecting boundaries).
struct Stencil {
  int w = 0, h = 0, stride = 0;
  std::vector<double> east, south, south_east, south_west, diag;

  std::size_t at(int x, int y) const {
    return static_cast<std::size_t>(y + 1) * stride + static_cast<std::size_t>(x + 1);
  }
};

Stencil build_stencil(const TensorField& f) {
  Stencil s;
  s.w = f.width;
  s.h = f.height;
  s.stride = f.width + 2;
  const std::size_t n = static_cast<std::size_t>(s.stride) * (f.height + 2);
  s.east.assign(n, 0.0);
  s.south.assign(n, 0.0);
  s.south_east.assign(n, 0.0);
  s.south_west.assign(n, 0.0);
  s.diag.assign(n, 0.0);
  const int w = f.width, h = f.height;
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

  if (w == 1 || h == 1) {
    // Degenerate 1-D grid: plain three-point stencil along the line.
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (x + 1 < w) s.east[s.at(x, y)] = 0.5 * (f.a[idx(x, y)] + f.a[idx(x + 1, y)]);
        if (y + 1 < h) s.south[s.at(x, y)] = 0.5 * (f.c[idx(x, y)] + f.c[idx(x, y + 1)]);
      }
  } else {
    for (int y = 0; y + 1 < h; ++y)
      for (int x = 0; x + 1 < w; ++x) {
        const std::size_t i00 = idx(x, y), i10 = idx(x + 1, y);
        const std::size_t i01 = idx(x, y + 1), i11 = idx(x + 1, y + 1);
        const double a = 0.25 * (f.a[i00] + f.a[i10] + f.a[i01] + f.a[i11]);
        const double b = 0.25 * (f.b[i00] + f.b[i10] + f.b[i01] + f.b[i11]);
        const double c = 0.25 * (f.c[i00] + f.c[i10] + f.c[i01] + f.c[i11]);
        const double ab = std::min({std::abs(b), a, c});
        const double bc = b < 0.0 ? -ab : ab;
        const double wx = 0.5 * (a - ab);
        const double wy = 0.5 * (c - ab);
        s.east[s.at(x, y)] += wx;
        s.east[s.at(x, y + 1)] += wx;
        s.south[s.at(x, y)] += wy;
        s.south[s.at(x + 1, y)] += wy;
        s.south_east[s.at(x, y)] += 0.5 * (ab + bc);
        s.south_west[s.at(x + 1, y)] += 0.5 * (ab - bc);
      }
  }

  const std::size_t st = static_cast<std::size_t>(s.stride);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t p = s.at(x, y);
      s.diag[p] = s.east[p] + s.east[p - 1] + s.south[p] + s.south[p - st] +
                  s.south_east[p] + s.south_east[p - st - 1] + s.south_west[p] +
                  s.south_west[p - st + 1];
    }
  return s;
}

// sum_q w_pq (u_q - u_p) = sum_q w_pq u_q - diag_p u_p
inline double apply_at(const Stencil& s, const double* u, std::size_t p) {
  const std::size_t st = static_cast<std::size_t>(s.stride);
  return s.east[p] * u[p + 1] + s.east[p - 1] * u[p - 1] + s.south[p] * u[p + st] +
         s.south[p - st] * u[p - st] + s.south_east[p] * u[p + st + 1] +
         s.south_east[p - st - 1] * u[p - st - 1] +
         s.south_west[p] * u[p + st - 1] + s.south_west[p - st + 1] * u[p - st + 1] -
         s.diag[p] * u[p];
}

class Problem {
 public:
  Problem(const PixelPlane& init, const PixelMask& mask)
      : w_(init.width), h_(init.height), stride_(init.width + 2) {
    const std::size_t n = static_cast<std::size_t>(stride_) * (h_ + 2);
    u_.assign(n, 0.0);
    const PixelPlane guess = initial_guess(init, mask);
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) {
        const std::size_t p = pad(x, y);
        u_[p] = guess.at(x, y);
        if (!mask.at(x, y)) unknown_.push_back(p);
      }
    r_.assign(n, 0.0);
    z_.assign(n, 0.0);
    d_.assign(n, 0.0);
    q_.assign(n, 0.0);
  }

  bool has_unknowns() const { return !unknown_.empty(); }

  PixelPlane image() const {
    PixelPlane out(w_, h_);
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) out.at(x, y) = u_[pad(x, y)];
    return out;
  }

  // Current iterate with the padding removed (for tensor construction).
  PixelPlane current() const { return image(); }

  double residual_norm(const Stencil& s) const {
    double sum = 0.0;
    for (std::size_t p : unknown_) {
      const double r = apply_at(s, u_.data(), p);
      sum += r * r;
    }
    return std::sqrt(sum);
  }

  // Jacobi-preconditioned conjugate gradients on the unknowns with the
  // stencil frozen. Returns the iteration count; `res` receives the final
  // residual norm.
  int cg(const Stencil& s, int max_iter, double target, double& res) {
    double rz = 0.0, rr = 0.0;
    for (std::size_t p : unknown_) {
      r_[p] = apply_at(s, u_.data(), p);
      z_[p] = r_[p] * inv_diag(s, p);
      d_[p] = z_[p];
      rz += r_[p] * z_[p];
      rr += r_[p] * r_[p];
    }
    res = std::sqrt(rr);
    int it = 0;
    while (it < max_iter && res > target) {
      double dq = 0.0;
      for (std::size_t p : unknown_) {
        q_[p] = -apply_at(s, d_.data(), p);
        dq += d_[p] * q_[p];
      }
      if (!(dq > 0.0)) break;  // search direction exhausted
      const double alpha = rz / dq;
      double rz_new = 0.0;
      rr = 0.0;
      for (std::size_t p : unknown_) {
        u_[p] += alpha * d_[p];
        r_[p] -= alpha * q_[p];
        z_[p] = r_[p] * inv_diag(s, p);
        rz_new += r_[p] * z_[p];
        rr += r_[p] * r_[p];
      }
      ++it;
      res = std::sqrt(rr);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t p : unknown_) d_[p] = z_[p] + beta * d_[p];
    }
    for (std::size_t p : unknown_) d_[p] = 0.0;
    return it;
  }

 private:
  std::size_t pad(int x, int y) const {
    return static_cast<std::size_t>(y + 1) * stride_ + static_cast<std::size_t>(x + 1);
  }
  static double inv_diag(const Stencil& s, std::size_t p) {
    return s.diag[p] > 1e-12 ? 1.0 / s.diag[p] : 1.0;
  }

  int w_, h_, stride_;
  std::vector<double> u_, r_, z_, d_, q_;
  std::vector<std::size_t> unknown_;
};

void check_inputs(const PixelPlane& init, const PixelMask& mask,
                  const SolverConfig& cfg) {
  validate(cfg);
  if (init.width != mask.width || init.height != mask.height) {
    throw InvalidArgument("inpainting mask does not match image");
  }
  if (init.size() == 0) throw InvalidArgument("empty image");
  if (mask.count() == 0) {
    throw InvalidArgument("inpainting mask has no known pixels");
  }
}

}  // namespace

InpaintResult inpaint(const PixelPlane& init, const PixelMask& mask,
                      const EEDParams& params, const SolverConfig& cfg) {
  check_inputs(init, mask, cfg);
  validate(params);
  Problem prob(init, mask);
  InpaintResult res;
  if (!prob.has_unknowns()) {
    res.image = init;
    res.converged = true;
    return res;
  }

  Stencil s = build_stencil(diffusion_tensor(prob.current(), params));
  const double r0 = prob.residual_norm(s);
  const double target = cfg.residual_tol * r0;
  double r = r0;
  int used = 0;
  bool converged = r0 == 0.0;
  for (int outer = 1; outer <= cfg.max_outer && !converged; ++outer) {
    if (outer > 1) {
      s = build_stencil(diffusion_tensor(prob.current(), params));
      r = prob.residual_norm(s);
      if (r <= target) {
        converged = true;
        break;
      }
    }
    const int budget = outer == cfg.max_outer
                           ? cfg.max_inner - used
                           : std::min(cfg.tensor_refresh, cfg.max_inner - used);
    if (budget <= 0) break;
    used += prob.cg(s, budget, target, r);
    res.outer_iterations = outer;
  }
  if (!converged) {
    // Judge convergence on the nonlinear residual with a fresh tensor.
    s = build_stencil(diffusion_tensor(prob.current(), params));
    r = prob.residual_norm(s);
    converged = r <= target;
  }
  res.image = prob.image();
  res.converged = converged;
  res.inner_iterations = used;
  res.relative_residual = r0 > 0.0 ? r / r0 : 0.0;
  return res;
}

InpaintResult inpaint_guided(const PixelPlane& init, const PixelMask& mask,
                             const TensorField& guide, const SolverConfig& cfg) {
  check_inputs(init, mask, cfg);
  if (guide.width != init.width || guide.height != init.height ||
      guide.size() != init.size()) {
    throw InvalidArgument("guide tensor does not match image");
  }
  Problem prob(init, mask);
  InpaintResult res;
  if (!prob.has_unknowns()) {
    res.image = init;
    res.converged = true;
    return res;
  }
  const Stencil s = build_stencil(guide);
  const double r0 = prob.residual_norm(s);
  double r = r0;
  if (r0 > 0.0) {
    res.inner_iterations = prob.cg(s, cfg.max_inner, cfg.residual_tol * r0, r);
  }
  res.outer_iterations = 1;
  res.image = prob.image();
  res.relative_residual = r0 > 0.0 ? r / r0 : 0.0;
  res.converged = r <= cfg.residual_tol * r0;
  return res;
}

PixelPlane apply_operator(const TensorField& field, const PixelPlane& u) {
  if (field.width != u.width || field.height != u.height) {
    throw InvalidArgument("tensor field does not match image");
  }
  const Stencil s = build_stencil(field);
  std::vector<double> padded(static_cast<std::size_t>(s.stride) * (u.height + 2), 0.0);
  for (int y = 0; y < u.height; ++y)
    for (int x = 0; x < u.width; ++x) padded[s.at(x, y)] = u.at(x, y);
  PixelPlane out(u.width, u.height);
  for (int y = 0; y < u.height; ++y)
    for (int x = 0; x < u.width; ++x) out.at(x, y) = apply_at(s, padded.data(), s.at(x, y));
  return out;
}

}  // namespace beed::eed
