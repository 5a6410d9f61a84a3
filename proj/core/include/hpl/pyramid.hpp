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

#ifndef HPL_PYRAMID_HPP
#define HPL_PYRAMID_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "hpl/matrix.hpp"
#include "hpl/rng.hpp"

namespace hpl {

/// One label vector per level; labels[0] is the class label.
struct HierarchyLabels {
  std::vector<std::vector<int>> labels;

  friend bool operator==(const HierarchyLabels&, const HierarchyLabels&) = default;
};

/**
 * Proxy pyramid P_0..P_{L-1} with parent maps Q_0..Q_{L-2}.
 *
 * Level 0 holds one learnable proxy per class. Every higher level is a set of
 * coarse proxies maintained by clustering the level below: Q_l[i] is the
 * parent in level l+1 of proxy i in level l. Level sizes never change after
 * construction and are non-increasing going up.
 *
 * Clustering runs on raw proxy vectors under squared Euclidean distance
 * unless `normalize_before_clustering` is set, in which case each child is
 * unit-normalized before distances and means are taken.
 */
class ProxyPyramid {
 public:
  /// Single-level pyramid (no coarse levels).
  ProxyPyramid(Matrix fine_proxies, double weight = 1.0);

  /// Validates every invariant; throws ContractError on violation.
  /// `gt_mode` restores a frozen Q_0 as-is (checkpoint loading).
  ProxyPyramid(std::vector<Matrix> levels, std::vector<std::vector<int>> assignments,
               std::vector<double> weights, bool gt_mode = false);

  std::size_t num_levels() const noexcept { return levels_.size(); }
  std::size_t level_size(std::size_t l) const { return levels_.at(l).rows(); }
  std::size_t dim() const noexcept { return levels_.front().cols(); }

  const Matrix& level(std::size_t l) const { return levels_.at(l); }
  std::span<const Matrix> levels() const noexcept { return levels_; }
  /// Level 0 is the only level callers may write (gradient updates).
  Matrix& fine_proxies() noexcept { return levels_.front(); }

  /// Q_l, mapping level l to level l+1.
  const std::vector<int>& assignment(std::size_t l) const { return assignments_.at(l); }
  const std::vector<std::vector<int>>& assignments() const noexcept { return assignments_; }

  std::span<const double> weights() const noexcept { return weights_; }

  bool gt_mode() const noexcept { return gt_mode_; }
  bool normalize_before_clustering() const noexcept { return normalize_; }
  void set_normalize_before_clustering(bool on) noexcept { normalize_ = on; }

  /// Q_l[i] = argmin_j |P_l[i] - P_{l+1}[j]|^2 for every level (ties -> lowest j).
  /// In GT mode Q_0 is frozen and left as is.
  void update_assignments();

  /// P_{l+1}[j] = mean of the children assigned to j; childless parents are
  /// left unchanged.
  void update_centroids();

  /// Freezes Q_0 to a fixed class -> super-class map and recomputes level 1
  /// from it. Only two-level pyramids are supported; the map must cover
  /// every coarse proxy index 0..level_size(1)-1.
  void set_fixed_hierarchy(std::span<const int> gt_assignment);

  /// y^0 = y, y^{l+1}[i] = Q_l[y^l[i]].
  HierarchyLabels propagate_labels(std::span<const int> y) const;

  /// Sum over levels of the within-cluster squared error between each child
  /// and its assigned parent, in the clustering space.
  double clustering_objective() const;

  /// Bitwise equality of proxies, assignments, weights and mode flags.
  friend bool operator==(const ProxyPyramid&, const ProxyPyramid&) = default;

 private:
  void validate() const;
  Matrix clustering_view(std::size_t l) const;

  std::vector<Matrix> levels_;
  std::vector<std::vector<int>> assignments_;
  std::vector<double> weights_;
  bool gt_mode_ = false;
  bool normalize_ = false;
};

/// Builds a pyramid from trained fine proxies: level l+1 is the k-means
/// clustering (k = level_sizes[l+1]) of level l, and Q_l its assignment.
/// `level_sizes[0]` must equal the number of fine proxies; sizes must not
/// increase going up.
ProxyPyramid init_pyramid(const Matrix& fine_proxies, std::span<const std::size_t> level_sizes,
                          std::span<const double> weights, Rng& rng,
                          bool normalize_before_clustering = false, int kmeans_max_iters = 100);

}  // namespace hpl

#endif  // HPL_PYRAMID_HPP
