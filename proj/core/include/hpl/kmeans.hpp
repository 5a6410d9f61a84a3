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

#ifndef HPL_KMEANS_HPP
#define HPL_KMEANS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "hpl/matrix.hpp"
#include "hpl/rng.hpp"

namespace hpl {

struct KMeansResult {
  Matrix centroids;             // k x D
  std::vector<int> assignment;  // n entries in [0, k)
  double sse = 0.0;             // sum of squared distances to assigned centroids
  int iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding on squared Euclidean distance.
/// Stops when assignments are stable or after `max_iters` rounds. Ties go to
/// the lowest centroid index; a cluster that empties keeps its centroid.
KMeansResult kmeans(const Matrix& points, std::size_t k, Rng& rng, int max_iters = 100);

/// Index of the nearest row of `centroids` (lowest index on ties).
std::size_t nearest_row(std::span<const double> point, const Matrix& centroids);

/// Sum over rows i of |points[i] - centroids[assignment[i]]|^2.
double clustering_sse(const Matrix& points, const Matrix& centroids,
                      std::span<const int> assignment);

}  // namespace hpl

#endif  // HPL_KMEANS_HPP
