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

#include "hpl/retrieval.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "hpl/errors.hpp"
#include "hpl/parallel.hpp"
#include "hpl/vector_math.hpp"

namespace hpl {

std::vector<std::size_t> rank_gallery(std::span<const double> query, const Matrix& gallery,
                                      std::optional<std::size_t> exclude) {
  if (gallery.rows() == 0) throw ContractError("rank_gallery: empty gallery");
  std::vector<double> sims(gallery.rows());
  std::vector<std::size_t> order;
  order.reserve(gallery.rows());
  for (std::size_t g = 0; g < gallery.rows(); ++g) {
    if (exclude && *exclude == g) continue;
    sims[g] = cosine_similarity(query, gallery.row(g));
    order.push_back(g);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return a < b;
  });
  return order;
}

RetrievalReport evaluate(const Matrix& query_embs, std::span<const int> query_labels,
                         const Matrix& gallery_embs, std::span<const int> gallery_labels,
                         std::span<const std::size_t> ks, bool same_set) {
  if (query_labels.size() != query_embs.rows() || gallery_labels.size() != gallery_embs.rows()) {
    throw ContractError("evaluate: label counts do not match embedding rows");
  }
  if (query_embs.rows() > 0 && gallery_embs.cols() != query_embs.cols()) {
    throw ContractError("evaluate: query and gallery dimensions differ");
  }
  if (same_set && (query_embs != gallery_embs ||
                   !std::equal(query_labels.begin(), query_labels.end(), gallery_labels.begin(),
                               gallery_labels.end()))) {
    throw ContractError("evaluate: same_set requires identical query and gallery arrays");
  }
  for (std::size_t k : ks) {
    if (k == 0) throw ContractError("evaluate: K must be positive");
  }

  const std::size_t num_queries = query_embs.rows();
  // Relevant-item counts per query, checked up front so the error is deterministic.
  std::vector<std::size_t> num_relevant(num_queries, 0);
  for (std::size_t q = 0; q < num_queries; ++q) {
    for (std::size_t g = 0; g < gallery_labels.size(); ++g) {
      if (same_set && g == q) continue;
      if (gallery_labels[g] == query_labels[q]) ++num_relevant[q];
    }
    if (num_relevant[q] == 0) {
      throw ContractError("evaluate: query " + std::to_string(q) + " of class " +
                          std::to_string(query_labels[q]) + " has no relevant gallery item");
    }
  }

  RetrievalReport report;
  report.num_queries = num_queries;
  report.per_query.resize(num_queries);
  parallel_for(num_queries, [&](std::size_t q) {
    const auto order = rank_gallery(query_embs.row(q), gallery_embs,
                                    same_set ? std::optional<std::size_t>(q) : std::nullopt);
    QueryResult& res = report.per_query[q];
    res.num_relevant = num_relevant[q];
    std::size_t hits = 0;
    double precision_sum = 0.0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      if (gallery_labels[order[rank]] != query_labels[q]) continue;
      if (res.first_relevant_rank == 0) res.first_relevant_rank = rank + 1;
      if (rank >= res.num_relevant) break;
      ++hits;
      precision_sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
    res.relevant_in_top_r = hits;
    res.average_precision_at_r = precision_sum / static_cast<double>(res.num_relevant);
  });

  const std::size_t gallery_size = gallery_embs.rows() - (same_set && gallery_embs.rows() > 0 ? 1 : 0);
  for (std::size_t k : ks) {
    const std::size_t kk = std::min(k, gallery_size);
    std::size_t found = 0;
    for (const QueryResult& res : report.per_query) {
      if (res.first_relevant_rank <= kk) ++found;
    }
    report.recall_at[k] = num_queries ? static_cast<double>(found) / static_cast<double>(num_queries) : 0.0;
  }
  double rp = 0.0;
  double ap = 0.0;
  for (const QueryResult& res : report.per_query) {
    rp += static_cast<double>(res.relevant_in_top_r) / static_cast<double>(res.num_relevant);
    ap += res.average_precision_at_r;
  }
  if (num_queries > 0) {
    report.r_precision = rp / static_cast<double>(num_queries);
    report.map_at_r = ap / static_cast<double>(num_queries);
  }
  return report;
}

Matrix embed_dataset(const Mlp& net, const Dataset& dataset) {
  if (dataset.size() > 0 && dataset.input_dim() != net.input_dim()) {
    throw ContractError("embed_dataset: dataset has " + std::to_string(dataset.input_dim()) +
                        " features, network expects " + std::to_string(net.input_dim()));
  }
  return embed(net, dataset.features);
}

}  // namespace hpl
