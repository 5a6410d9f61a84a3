// Copyright 2026 The HPL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "bench_util.hpp"
#include "hpl/losses.hpp"

namespace hpl::bench {
namespace {

constexpr std::size_t kDim = 64;
constexpr std::size_t kClasses = 100;

void BM_ProxyNca(benchmark::State& state) {
  Rng rng(1);
  const auto b = static_cast<std::size_t>(state.range(0));
  const Matrix x = gaussian(b, kDim, rng);
  const Matrix p = gaussian(kClasses, kDim, rng);
  const std::vector<int> y = labels(b, kClasses, rng);
  for (auto _ : state) benchmark::DoNotOptimize(proxy_nca_loss(x, y, p));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(b));
}
BENCHMARK(BM_ProxyNca)->RangeMultiplier(4)->Range(16, 256);

void BM_ProxyAnchor(benchmark::State& state) {
  Rng rng(2);
  const auto b = static_cast<std::size_t>(state.range(0));
  const Matrix x = gaussian(b, kDim, rng);
  const Matrix p = gaussian(kClasses, kDim, rng);
  const std::vector<int> y = labels(b, kClasses, rng);
  const LossConfig cfg{LossKind::kProxyAnchor};
  for (auto _ : state) benchmark::DoNotOptimize(proxy_anchor_loss(x, y, p, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(b));
}
BENCHMARK(BM_ProxyAnchor)->RangeMultiplier(4)->Range(16, 256);

// Two-level loss; the coarse level adds one small extra pass.
void BM_HplTwoLevel(benchmark::State& state) {
  Rng rng(3);
  const std::size_t b = 64;
  const auto coarse = static_cast<std::size_t>(state.range(0));
  const Matrix x = gaussian(b, kDim, rng);
  const std::vector<Matrix> levels{gaussian(kClasses, kDim, rng), gaussian(coarse, kDim, rng)};
  std::vector<int> q(kClasses);
  for (std::size_t c = 0; c < kClasses; ++c) q[c] = static_cast<int>(c % coarse);
  const std::vector<int> y0 = labels(b, kClasses, rng);
  std::vector<int> y1(b);
  for (std::size_t i = 0; i < b; ++i) y1[i] = q[static_cast<std::size_t>(y0[i])];
  const std::vector<std::vector<int>> ys{y0, y1};
  const std::vector<double> w{1.0, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(hpl_loss(x, ys, levels, w, LossConfig{}));
}
BENCHMARK(BM_HplTwoLevel)->Arg(4)->Arg(16)->Arg(50);

}  // namespace
}  // namespace hpl::bench
