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

#include "bench_util.hpp"
#include "hpl/mlp.hpp"

namespace hpl::bench {
namespace {

void BM_Forward(benchmark::State& state) {
  Rng rng(4);
  const auto b = static_cast<std::size_t>(state.range(0));
  const Mlp net = Mlp::glorot({128, 256, 64}, rng);
  const Matrix in = gaussian(b, 128, rng);
  for (auto _ : state) benchmark::DoNotOptimize(embed(net, in));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(b));
}
BENCHMARK(BM_Forward)->RangeMultiplier(4)->Range(16, 256);

void BM_ForwardBackward(benchmark::State& state) {
  Rng rng(5);
  const auto b = static_cast<std::size_t>(state.range(0));
  const Mlp net = Mlp::glorot({128, 256, 64}, rng);
  const Matrix in = gaussian(b, 128, rng);
  const Matrix upstream = gaussian(b, 64, rng);
  for (auto _ : state) {
    const ForwardResult fr = forward(net, in);
    benchmark::DoNotOptimize(backward(net, fr.tape, upstream));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(b));
}
BENCHMARK(BM_ForwardBackward)->RangeMultiplier(4)->Range(16, 256);

}  // namespace
}  // namespace hpl::bench
