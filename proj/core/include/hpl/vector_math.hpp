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

#ifndef HPL_VECTOR_MATH_HPP
#define HPL_VECTOR_MATH_HPP

#include <span>
#include <vector>

namespace hpl {

using EmbeddingVector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

/// a.b / (|a| |b|). Throws DomainError on a zero-norm argument and
/// ContractError on a dimension mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Sum of squared coordinate differences.
double sq_euclidean(std::span<const double> a, std::span<const double> b);

/// Unit-length copy of `a`. Throws DomainError on the zero vector.
EmbeddingVector l2_normalize(std::span<const double> a);

bool all_finite(std::span<const double> a) noexcept;

}  // namespace hpl

#endif  // HPL_VECTOR_MATH_HPP
