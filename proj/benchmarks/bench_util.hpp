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

#ifndef HPL_BENCH_UTIL_HPP
#define HPL_BENCH_UTIL_HPP

#include <cstddef>
#include <vector>

#include "hpl/matrix.hpp"
#include "hpl/rng.hpp"

namespace hpl::bench {

inline Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

inline std::vector<int> labels(std::size_t n, std::size_t classes, Rng& rng) {
  std::vector<int> y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(classes));
  return y;
}

}  // namespace hpl::bench

#endif  // HPL_BENCH_UTIL_HPP
