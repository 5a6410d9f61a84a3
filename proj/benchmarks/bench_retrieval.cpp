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
#include "hpl/retrieval.hpp"

namespace hpl::bench {
namespace {

// Same-set evaluation is quadratic in the sample count.
void BM_EvaluateSameSet(benchmark::State& state) {
  Rng rng(9);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix emb = gaussian(n, 64, rng);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % (n / 10));
  const std::vector<std::size_t> ks{1, 2, 4, 8};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(emb, y, emb, y, ks, true));
  state.SetComplexityN(static_cast<int64_t>(n));
}
BENCHMARK(BM_EvaluateSameSet)->RangeMultiplier(2)->Range(200, 1600)->Complexity();

}  // namespace
}  // namespace hpl::bench
