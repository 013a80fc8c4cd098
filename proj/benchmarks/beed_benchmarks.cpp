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


#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "beed/arith_coder.hpp"
#include "beed/eed.hpp"
#include "beed/image.hpp"
#include "beed/jpeg.hpp"

namespace {

using namespace beed;

PixelPlane smooth_plane(int w, int h) {
  PixelPlane p(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      p.at(x, y) = 128.0 + 60.0 * std::sin(x * 0.07) * std::cos(y * 0.05) + (x > w / 2 ? 40 : 0);
  return p;
}

void BM_Fdct8x8(benchmark::State& state) {
  jpeg::Block tile;
  for (int i = 0; i < 64; ++i) tile[i] = (i * 37) % 255 - 128.0;
  for (auto _ : state) benchmark::DoNotOptimize(jpeg::fdct8x8(tile));
}
BENCHMARK(BM_Fdct8x8);

void BM_JpegEncodeGrey(benchmark::State& state) {
  const PixelPlane p = smooth_plane(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(jpeg::encode_grey(p, 50));
  state.SetBytesProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_JpegEncodeGrey)->Arg(128)->Arg(512);

void BM_JpegDecodeGrey(benchmark::State& state) {
  const auto s = jpeg::encode_grey(smooth_plane(256, 256), 50);
  for (auto _ : state) benchmark::DoNotOptimize(jpeg::decode_grey(s));
}
BENCHMARK(BM_JpegDecodeGrey);

void BM_ArithEncode(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution d(0.2);
  std::vector<bool> bits(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(arith::encode(bits));
}
BENCHMARK(BM_ArithEncode)->Arg(1 << 12)->Arg(1 << 16);

void BM_DiffusionTensor(benchmark::State& state) {
  const PixelPlane p = smooth_plane(256, 256);
  for (auto _ : state) benchmark::DoNotOptimize(eed::diffusion_tensor(p, {0.8, 1.0}));
}
BENCHMARK(BM_DiffusionTensor);

void BM_Inpaint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const PixelPlane p = smooth_plane(n, n);
  PixelMask m(n, n);
  std::mt19937_64 rng(2);
  for (auto& k : m.known) k = rng() % 20 == 0;
  for (auto _ : state) benchmark::DoNotOptimize(eed::inpaint(p, m, {0.8, 1.0}));
}
BENCHMARK(BM_Inpaint)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
