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

#include <cstdint>
#include <random>
#include <vector>

#include "beed/eed.hpp"
#include "beed/image.hpp"

// Straightforward reference implementations used as test oracles. They share
// no code with the library.
namespace beed::testing {

PixelPlane random_plane(std::mt19937_64& rng, int w, int h, double lo = 0.0,
                        double hi = 255.0);
PixelMask random_mask(std::mt19937_64& rng, int w, int h, double p_known);

// F[v*8+u] = 1/4 C(u) C(v) sum f[y*8+x] cos((2x+1)u pi/16) cos((2y+1)v pi/16)
std::vector<double> dct_by_matrix(const std::vector<double>& tile);
std::vector<double> idct_by_matrix(const std::vector<double>& coeffs);

// Gaussian elimination with partial pivoting on a dense row-major matrix.
std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b, int n);

// Steady state of the cell-energy discretization with a frozen tensor,
// assembled as a dense graph Laplacian and solved directly.
PixelPlane dense_inpaint(const PixelPlane& init, const PixelMask& mask,
                         const eed::TensorField& field);

// 2-D Gaussian convolution evaluated pixel by pixel with the full 2-D
// kernel, radius ceil(3 sigma), mirrored boundaries.
PixelPlane gaussian_direct(const PixelPlane& plane, double sigma);

double reference_mse(const std::vector<const PixelPlane*>& a,
                     const std::vector<const PixelPlane*>& b);

}  // namespace beed::testing
