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

#include "hpl/vector_math.hpp"

#include <algorithm>
#include <cmath>

#include "hpl/errors.hpp"

namespace hpl {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += a[d] * b[d];
  return s;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("cosine_similarity: dimension mismatch");
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine_similarity: zero-norm vector");
  const double s = dot(a, b) / (na * nb);
  // Rounding can push |s| a hair past 1.
  return std::clamp(s, -1.0, 1.0);
}

double sq_euclidean(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("sq_euclidean: dimension mismatch");
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

EmbeddingVector l2_normalize(std::span<const double> a) {
  const double n = l2_norm(a);
  if (n == 0.0) throw DomainError("l2_normalize: zero vector");
  EmbeddingVector out(a.begin(), a.end());
  for (double& v : out) v /= n;
  return out;
}

bool all_finite(std::span<const double> a) noexcept {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace hpl
