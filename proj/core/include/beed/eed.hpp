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

#include <vector>

#include "beed/image.hpp"

// Edge-enhancing diffusion (EED) inpainting.
//
// Unknown pixels are the steady state of
//   du/dt = div(D(grad u_sigma) grad u)
// with Dirichlet data on the known pixels and reflecting outer boundaries.
// D has eigenvector v1 || grad u_sigma with eigenvalue g(|grad u_sigma|^2)
// (Charbonnier) and eigenvalue 1 across it.
namespace beed::eed {

struct EEDParams {
  double sigma = 0.8;   // presmoothing standard deviation, pixels
  double lambda = 1.0;  // contrast parameter, grey levels

  bool operator==(const EEDParams&) const = default;
};

// Throws InvalidArgument unless both values are finite and positive.
void validate(const EEDParams& p);

// Symmetric per-pixel tensors [[a, b], [b, c]].
struct TensorField {
  int width = 0;
  int height = 0;
  std::vector<double> a, b, c;

  TensorField() = default;
  TensorField(int w, int h);
  static TensorField identity(int w, int h);
  std::size_t size() const { return a.size(); }
};

struct SolverConfig {
  double residual_tol = 1e-6;  // relative to the residual of the initial guess
  int max_outer = 20;          // tensor rebuilds
  int max_inner = 10000;       // total CG iterations
  int tensor_refresh = 50;     // CG iterations between tensor rebuilds
};

void validate(const SolverConfig& cfg);

struct InpaintResult {
  PixelPlane image;
  bool converged = false;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double relative_residual = 0.0;
};

inline constexpr double kGradientEpsilon = 1e-10;

// Separable sampled Gaussian, radius ceil(3 sigma), renormalized, mirrored
// boundaries. sigma == 0 is the identity.
PixelPlane gaussian_smooth(const PixelPlane& plane, double sigma);

// (1 + s2 / lambda^2)^(-1/2)
double charbonnier(double s2, double lambda);

TensorField diffusion_tensor(const PixelPlane& plane, const EEDParams& params);

// Cheap pyramid (push-pull) interpolation of the known pixels, used as the
// starting point of every solve. Known pixels are copied unchanged.
PixelPlane initial_guess(const PixelPlane& init, const PixelMask& mask);

// Nonlinear EED inpainting with a lagged tensor. Throws InvalidArgument if
// the mask has no known pixel or shapes differ.
InpaintResult inpaint(const PixelPlane& init, const PixelMask& mask,
                      const EEDParams& params, const SolverConfig& cfg = {});

// Linear anisotropic inpainting with a fixed external tensor.
InpaintResult inpaint_guided(const PixelPlane& init, const PixelMask& mask,
                             const TensorField& guide,
                             const SolverConfig& cfg = {});

// Applies the discrete operator div(D grad u) to `u` (all pixels treated as
// unknown). Exposed for diagnostics and residual checks.
PixelPlane apply_operator(const TensorField& field, const PixelPlane& u);

}  // namespace beed::eed
