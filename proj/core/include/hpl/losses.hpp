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

#ifndef HPL_LOSSES_HPP
#define HPL_LOSSES_HPP

#include <span>
#include <string_view>
#include <vector>

#include "hpl/matrix.hpp"

namespace hpl {

enum class LossKind { kProxyNca, kProxyAnchor };

std::string_view to_string(LossKind kind);
/// Accepts "nca" / "proxy_nca" and "anchor" / "proxy_anchor".
LossKind parse_loss_kind(std::string_view name);

struct LossConfig {
  LossKind kind = LossKind::kProxyNca;
  double alpha = 32.0;  // Proxy Anchor scale
  double delta = 0.1;   // Proxy Anchor margin

  void validate() const;
  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

/// Loss value with gradients w.r.t. the batch embeddings (B x D) and the
/// proxies the loss was evaluated against (C x D).
struct LossOutput {
  double value = 0.0;
  Matrix d_embeddings;
  Matrix d_proxies;
  /// hpl_loss only: unweighted value per level, NaN for skipped (zero-weight) levels.
  std::vector<double> level_values;
};

/// Proxy-NCA summed over the batch:
///   sum_i -log( exp(s(x_i, p_{y_i})) / sum_{c != y_i} exp(s(x_i, p_c)) )
/// with s the cosine similarity. The positive proxy is not part of the
/// denominator, so values below zero are reachable. Needs C >= 2.
LossOutput proxy_nca_loss(const Matrix& embeddings, std::span<const int> labels,
                          const Matrix& proxies);

/// Proxy Anchor with scale `cfg.alpha` and margin `cfg.delta`. The positive
/// term averages over proxies that have a positive in the batch (0 if none);
/// the negative term averages over all proxies.
LossOutput proxy_anchor_loss(const Matrix& embeddings, std::span<const int> labels,
                             const Matrix& proxies, const LossConfig& cfg);

/// Dispatches on cfg.kind.
LossOutput base_loss(const Matrix& embeddings, std::span<const int> labels,
                     const Matrix& proxies, const LossConfig& cfg);

/// Weighted sum over pyramid levels of the base loss, each level scored
/// against its own labels and proxies. d_embeddings accumulates every level;
/// d_proxies is the level-0 gradient only (coarse proxies are never trained
/// by gradient). Levels with zero weight are skipped.
LossOutput hpl_loss(const Matrix& embeddings, std::span<const std::vector<int>> level_labels,
                    std::span<const Matrix> level_proxies, std::span<const double> weights,
                    const LossConfig& cfg);

}  // namespace hpl

#endif  // HPL_LOSSES_HPP
