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
#include "hpl/kmeans.hpp"
#include "hpl/pyramid.hpp"

namespace hpl::bench {
namespace {

void BM_KMeans(benchmark::State& state) {
  Rng data_rng(6);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix pts = gaussian(n, 64, data_rng);
  for (auto _ : state) {
    Rng rng(7);
    benchmark::DoNotOptimize(kmeans(pts, n / 8, rng));
  }
}
BENCHMARK(BM_KMeans)->Arg(100)->Arg(500)->Arg(2000);

// One refresh of a built pyramid: reassign then recompute centroids.
void BM_PyramidRefresh(benchmark::State& state) {
  Rng rng(8);
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::vector<std::size_t> sizes{n, n / 8};
  const std::vector<double> weights{1.0, 0.1};
  ProxyPyramid pyr = init_pyramid(gaussian(n, 64, rng), sizes, weights, rng);
  for (auto _ : state) {
    pyr.update_assignments();
    pyr.update_centroids();
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_PyramidRefresh)->Arg(100)->Arg(500)->Arg(2000);

}  // namespace
}  // namespace hpl::bench
