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

#ifndef HPL_RETRIEVAL_HPP
#define HPL_RETRIEVAL_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "hpl/dataset.hpp"
#include "hpl/matrix.hpp"
#include "hpl/mlp.hpp"

namespace hpl {

struct QueryResult {
  std::size_t num_relevant = 0;        // R
  std::size_t relevant_in_top_r = 0;
  double average_precision_at_r = 0.0;
  std::size_t first_relevant_rank = 0;  // 1-based
};

struct RetrievalReport {
  std::map<std::size_t, double> recall_at;
  double r_precision = 0.0;
  double map_at_r = 0.0;
  std::size_t num_queries = 0;
  std::vector<QueryResult> per_query;
};

/// Gallery indices by descending cosine similarity to `query`, ties by
/// ascending index. `exclude` removes one index (the query itself in the
/// single-set protocol).
std::vector<std::size_t> rank_gallery(std::span<const double> query, const Matrix& gallery,
                                      std::optional<std::size_t> exclude = std::nullopt);

/// Recall@K, R-Precision and MAP@R over exact cosine rankings.
///
/// With `same_set`, the query and gallery arrays must be identical and each
/// query's own row is left out of its ranking. Every query needs at least one
/// relevant gallery item; otherwise ContractError names the class. K values
/// larger than the gallery are clamped to its size.
RetrievalReport evaluate(const Matrix& query_embs, std::span<const int> query_labels,
                         const Matrix& gallery_embs, std::span<const int> gallery_labels,
                         std::span<const std::size_t> ks, bool same_set);

/// Runs every sample through `net`, one row per sample.
Matrix embed_dataset(const Mlp& net, const Dataset& dataset);

}  // namespace hpl

#endif  // HPL_RETRIEVAL_HPP
