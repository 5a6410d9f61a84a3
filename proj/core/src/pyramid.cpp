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

#include "hpl/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "hpl/errors.hpp"
#include "hpl/kmeans.hpp"
#include "hpl/vector_math.hpp"

namespace hpl {

ProxyPyramid::ProxyPyramid(Matrix fine_proxies, double weight)
    : ProxyPyramid(std::vector<Matrix>{std::move(fine_proxies)}, {}, {weight}) {}

ProxyPyramid::ProxyPyramid(std::vector<Matrix> levels, std::vector<std::vector<int>> assignments,
                           std::vector<double> weights, bool gt_mode)
    : levels_(std::move(levels)),
      assignments_(std::move(assignments)),
      weights_(std::move(weights)),
      gt_mode_(gt_mode) {
  validate();
  if (gt_mode_ && levels_.size() != 2) {
    throw ContractError("ProxyPyramid: a fixed hierarchy needs exactly two levels");
  }
}

void ProxyPyramid::validate() const {
  if (levels_.empty()) throw ContractError("ProxyPyramid: need at least one level");
  if (assignments_.size() + 1 != levels_.size()) {
    throw ContractError("ProxyPyramid: need one assignment per adjacent level pair");
  }
  if (weights_.size() != levels_.size()) {
    throw ContractError("ProxyPyramid: need one weight per level");
  }
  const std::size_t dim = levels_.front().cols();
  if (dim == 0 || levels_.front().rows() == 0) throw ContractError("ProxyPyramid: empty level 0");
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const Matrix& level = levels_[l];
    if (level.cols() != dim || level.rows() == 0) {
      throw ContractError("ProxyPyramid: level " + std::to_string(l) + " has a bad shape");
    }
    if (l > 0 && level.rows() > levels_[l - 1].rows()) {
      throw ContractError("ProxyPyramid: level sizes must be non-increasing");
    }
    if (!std::isfinite(weights_[l]) || weights_[l] < 0.0) {
      throw ContractError("ProxyPyramid: weights must be finite and >= 0");
    }
  }
  for (std::size_t l = 0; l < assignments_.size(); ++l) {
    if (assignments_[l].size() != levels_[l].rows()) {
      throw ContractError("ProxyPyramid: Q_" + std::to_string(l) + " has the wrong length");
    }
    const int parents = static_cast<int>(levels_[l + 1].rows());
    for (int q : assignments_[l]) {
      if (q < 0 || q >= parents) {
        throw ContractError("ProxyPyramid: Q_" + std::to_string(l) + " entry out of range");
      }
    }
  }
}

Matrix ProxyPyramid::clustering_view(std::size_t l) const {
  Matrix view = levels_[l];
  if (!normalize_) return view;
  for (std::size_t r = 0; r < view.rows(); ++r) {
    const EmbeddingVector unit = l2_normalize(view.row(r));
    std::copy(unit.begin(), unit.end(), view.row(r).begin());
  }
  return view;
}

void ProxyPyramid::update_assignments() {
  for (std::size_t l = 0; l + 1 < levels_.size(); ++l) {
    if (l == 0 && gt_mode_) continue;
    const Matrix children = clustering_view(l);
    const Matrix& parents = levels_[l + 1];
    for (std::size_t i = 0; i < children.rows(); ++i) {
      assignments_[l][i] = static_cast<int>(nearest_row(children.row(i), parents));
    }
  }
}

void ProxyPyramid::update_centroids() {
  for (std::size_t l = 0; l + 1 < levels_.size(); ++l) {
    const Matrix children = clustering_view(l);
    Matrix& parents = levels_[l + 1];
    Matrix sums(parents.rows(), parents.cols());
    std::vector<std::size_t> counts(parents.rows(), 0);
    for (std::size_t i = 0; i < children.rows(); ++i) {
      const auto j = static_cast<std::size_t>(assignments_[l][i]);
      ++counts[j];
      auto dst = sums.row(j);
      const auto src = children.row(i);
      for (std::size_t d = 0; d < src.size(); ++d) dst[d] += src[d];
    }
    for (std::size_t j = 0; j < parents.rows(); ++j) {
      if (counts[j] == 0) continue;
      auto dst = parents.row(j);
      const auto src = sums.row(j);
      for (std::size_t d = 0; d < src.size(); ++d) dst[d] = src[d] / static_cast<double>(counts[j]);
    }
  }
}

void ProxyPyramid::set_fixed_hierarchy(std::span<const int> gt_assignment) {
  if (levels_.size() != 2) {
    throw ContractError("set_fixed_hierarchy: only two-level pyramids are supported");
  }
  if (gt_assignment.size() != levels_[0].rows()) {
    throw ContractError("set_fixed_hierarchy: need one super-class per fine proxy");
  }
  const int parents = static_cast<int>(levels_[1].rows());
  std::vector<bool> covered(static_cast<std::size_t>(parents), false);
  for (int g : gt_assignment) {
    if (g < 0 || g >= parents) {
      throw ContractError("set_fixed_hierarchy: super-class " + std::to_string(g) +
                          " outside [0, " + std::to_string(parents) + ")");
    }
    covered[static_cast<std::size_t>(g)] = true;
  }
  if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
    throw ContractError("set_fixed_hierarchy: every coarse proxy needs at least one child");
  }
  assignments_[0].assign(gt_assignment.begin(), gt_assignment.end());
  gt_mode_ = true;
  update_centroids();
}

HierarchyLabels ProxyPyramid::propagate_labels(std::span<const int> y) const {
  const int fine = static_cast<int>(levels_.front().rows());
  HierarchyLabels out;
  out.labels.reserve(levels_.size());
  out.labels.emplace_back(y.begin(), y.end());
  for (int v : out.labels.front()) {
    if (v < 0 || v >= fine) {
      throw ContractError("propagate_labels: label " + std::to_string(v) + " outside [0, " +
                          std::to_string(fine) + ")");
    }
  }
  for (std::size_t l = 0; l < assignments_.size(); ++l) {
    std::vector<int> next(y.size());
    const auto& prev = out.labels.back();
    for (std::size_t i = 0; i < prev.size(); ++i) {
      next[i] = assignments_[l][static_cast<std::size_t>(prev[i])];
    }
    out.labels.push_back(std::move(next));
  }
  return out;
}

double ProxyPyramid::clustering_objective() const {
  double total = 0.0;
  for (std::size_t l = 0; l < assignments_.size(); ++l) {
    total += clustering_sse(clustering_view(l), levels_[l + 1], assignments_[l]);
  }
  return total;
}

ProxyPyramid init_pyramid(const Matrix& fine_proxies, std::span<const std::size_t> level_sizes,
                          std::span<const double> weights, Rng& rng,
                          bool normalize_before_clustering, int kmeans_max_iters) {
  if (level_sizes.empty() || level_sizes[0] != fine_proxies.rows()) {
    throw ContractError("init_pyramid: level_sizes[0] must equal the number of fine proxies");
  }
  if (weights.size() != level_sizes.size()) {
    throw ContractError("init_pyramid: need one weight per level");
  }
  for (std::size_t l = 1; l < level_sizes.size(); ++l) {
    if (level_sizes[l] == 0 || level_sizes[l] > level_sizes[l - 1]) {
      throw ContractError("init_pyramid: level sizes must be positive and non-increasing");
    }
  }
  std::vector<Matrix> levels{fine_proxies};
  std::vector<std::vector<int>> assignments;
  for (std::size_t l = 0; l + 1 < level_sizes.size(); ++l) {
    Matrix points = levels.back();
    if (normalize_before_clustering) {
      for (std::size_t r = 0; r < points.rows(); ++r) {
        const EmbeddingVector unit = l2_normalize(points.row(r));
        std::copy(unit.begin(), unit.end(), points.row(r).begin());
      }
    }
    KMeansResult km = kmeans(points, level_sizes[l + 1], rng, kmeans_max_iters);
    levels.push_back(std::move(km.centroids));
    assignments.push_back(std::move(km.assignment));
  }
  ProxyPyramid pyramid(std::move(levels), std::move(assignments),
                       std::vector<double>(weights.begin(), weights.end()));
  pyramid.set_normalize_before_clustering(normalize_before_clustering);
  return pyramid;
}

}  // namespace hpl
