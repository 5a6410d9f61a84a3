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

#include "hpl/kmeans.hpp"

#include <algorithm>
#include <limits>

#include "hpl/errors.hpp"
#include "hpl/vector_math.hpp"

namespace hpl {

std::size_t nearest_row(std::span<const double> point, const Matrix& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.rows(); ++j) {
    const double d = sq_euclidean(point, centroids.row(j));
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

double clustering_sse(const Matrix& points, const Matrix& centroids,
                      std::span<const int> assignment) {
  double sse = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    sse += sq_euclidean(points.row(i), centroids.row(static_cast<std::size_t>(assignment[i])));
  }
  return sse;
}

namespace {

Matrix plus_plus_seeds(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix seeds(k, points.cols());
  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t pick = static_cast<std::size_t>(rng.below(n));
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += chosen[i] ? 0.0 : d2[i];
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (chosen[i] || d2[i] == 0.0) continue;
          acc += d2[i];
          pick = i;
          if (acc > target) break;
        }
      } else {
        // Every remaining point duplicates a seed; take one uniformly.
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i) {
          if (!chosen[i]) rest.push_back(i);
        }
        pick = rest[static_cast<std::size_t>(rng.below(rest.size()))];
      }
    }
    chosen[pick] = true;
    const auto src = points.row(pick);
    std::copy(src.begin(), src.end(), seeds.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_euclidean(points.row(i), src));
    }
  }
  return seeds;
}

void assign_all(const Matrix& points, const Matrix& centroids, std::vector<int>& assignment) {
  for (std::size_t i = 0; i < points.rows(); ++i) {
    assignment[i] = static_cast<int>(nearest_row(points.row(i), centroids));
  }
}

void recompute_means(const Matrix& points, std::span<const int> assignment, Matrix& centroids) {
  Matrix sums(centroids.rows(), centroids.cols());
  std::vector<std::size_t> counts(centroids.rows(), 0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const auto j = static_cast<std::size_t>(assignment[i]);
    ++counts[j];
    auto dst = sums.row(j);
    const auto src = points.row(i);
    for (std::size_t d = 0; d < src.size(); ++d) dst[d] += src[d];
  }
  for (std::size_t j = 0; j < centroids.rows(); ++j) {
    if (counts[j] == 0) continue;
    auto dst = centroids.row(j);
    const auto src = sums.row(j);
    for (std::size_t d = 0; d < src.size(); ++d) dst[d] = src[d] / static_cast<double>(counts[j]);
  }
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, Rng& rng, int max_iters) {
  const std::size_t n = points.rows();
  if (k == 0 || k > n) {
    throw ContractError("kmeans: need 1 <= k <= n (k=" + std::to_string(k) +
                        ", n=" + std::to_string(n) + ")");
  }
  if (!points.all_finite()) throw ContractError("kmeans: non-finite points");
  if (max_iters < 1) throw ContractError("kmeans: max_iters must be >= 1");

  KMeansResult result;
  result.centroids = plus_plus_seeds(points, k, rng);
  result.assignment.assign(n, 0);
  assign_all(points, result.centroids, result.assignment);

  std::vector<int> next(n, 0);
  bool stable = false;
  for (int it = 0; it < max_iters; ++it) {
    result.iterations = it + 1;
    recompute_means(points, result.assignment, result.centroids);
    assign_all(points, result.centroids, next);
    if (next == result.assignment) {
      stable = true;
      break;
    }
    result.assignment.swap(next);
  }
  if (!stable) recompute_means(points, result.assignment, result.centroids);
  result.sse = clustering_sse(points, result.centroids, result.assignment);
  return result;
}

}  // namespace hpl
