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

#include <gtest/gtest.h>

#include <numeric>
#include <vector>

#include "hpl/errors.hpp"
#include "hpl/mlp.hpp"
#include "hpl/retrieval.hpp"
#include "hpl/vector_math.hpp"
#include "oracles.hpp"

namespace hpl {
namespace {

const std::vector<std::size_t> kKs{1, 2, 4, 8};

TEST(RankGallery, Examples) {
  const Matrix g = Matrix::from_rows({{1, 0}, {0, 1}});
  EXPECT_EQ(rank_gallery(std::vector<double>{1, 0}, g), (std::vector<std::size_t>{0, 1}));
  const Matrix tie = Matrix::from_rows({{0, 1}, {1, 0}, {1, 0}});
  EXPECT_EQ(rank_gallery(std::vector<double>{1, 0}, tie), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(rank_gallery(std::vector<double>{1, 0}, tie, 1), (std::vector<std::size_t>{2, 0}));
  EXPECT_THROW(rank_gallery(std::vector<double>{1, 0}, Matrix(0, 2)), ContractError);
  EXPECT_THROW(rank_gallery(std::vector<double>{1, 0}, Matrix::from_rows({{0, 0}})), DomainError);
}

TEST(RankGallery, MatchesFullSortOracle) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Matrix g = oracle::random_matrix(50, 4, rng);
    const Matrix q = oracle::random_matrix(1, 4, rng);
    std::vector<std::pair<double, std::size_t>> keyed;
    for (std::size_t i = 0; i < 50; ++i) keyed.emplace_back(-oracle::cosine(q, 0, g, i), i);
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::size_t> expected;
    for (const auto& [_, i] : keyed) expected.push_back(i);
    EXPECT_EQ(rank_gallery(q.row(0), g), expected);
  }
}

TEST(Evaluate, ClosedForms) {
  // Query (1,0) of class 0. Gallery ranks by angle from the query.
  const Matrix q = Matrix::from_rows({{1, 0}});
  const std::vector<int> ql{0};
  auto gallery_at = [](std::vector<double> angles) {
    Matrix g(angles.size(), 2);
    for (std::size_t i = 0; i < angles.size(); ++i) {
      g(i, 0) = std::cos(angles[i]);
      g(i, 1) = std::sin(angles[i]);
    }
    return g;
  };
  const std::vector<std::size_t> ks{1, 3};
  {
    // Identical single relevant item.
    const RetrievalReport r = evaluate(q, ql, Matrix::from_rows({{2, 0}, {0, 1}}), std::vector<int>{0, 1}, ks, false);
    EXPECT_EQ(r.recall_at.at(1), 1.0);
    EXPECT_EQ(r.r_precision, 1.0);
    EXPECT_EQ(r.map_at_r, 1.0);
  }
  {
    // R=2, relevant at ranks 1 and 3.
    const RetrievalReport r =
        evaluate(q, ql, gallery_at({0.1, 0.2, 0.3}), std::vector<int>{0, 1, 0}, ks, false);
    EXPECT_EQ(r.r_precision, 0.5);
    EXPECT_EQ(r.map_at_r, 0.5);
    EXPECT_EQ(r.per_query[0].num_relevant, 2u);
  }
  {
    // R=2, relevant at ranks 1 and 2.
    const RetrievalReport r =
        evaluate(q, ql, gallery_at({0.1, 0.2, 0.3}), std::vector<int>{0, 0, 1}, ks, false);
    EXPECT_EQ(r.r_precision, 1.0);
    EXPECT_EQ(r.map_at_r, 1.0);
  }
}

TEST(Evaluate, SameSetExcludesSelf) {
  // Class 0 has two samples, so each query has R=1.
  const Matrix e = Matrix::from_rows({{1, 0}, {0.9, 0.1}, {0, 1}, {0.1, 0.9}});
  const std::vector<int> y{0, 0, 1, 1};
  const RetrievalReport r = evaluate(e, y, e, y, std::vector<std::size_t>{1}, true);
  for (const QueryResult& qr : r.per_query) EXPECT_EQ(qr.num_relevant, 1u);
  EXPECT_EQ(r.recall_at.at(1), 1.0);
  EXPECT_EQ(r.recall_at.size(), 1u);
}

TEST(Evaluate, Errors) {
  const Matrix e = Matrix::from_rows({{1, 0}, {0, 1}});
  const std::vector<int> y{0, 1};
  EXPECT_THROW(evaluate(e, y, e, y, kKs, true), ContractError);  // singleton classes
  EXPECT_THROW(evaluate(e, y, e, std::vector<int>{0, 0}, kKs, false), ContractError);
  EXPECT_THROW(evaluate(e, y, e, y, std::vector<std::size_t>{0}, false), ContractError);
  EXPECT_THROW(evaluate(e, y, Matrix(2, 3, 1.0), y, kKs, false), ContractError);
}

struct Problem {
  Matrix q;
  std::vector<int> ql;
  Matrix g;
  std::vector<int> gl;
};

// Every query class has at least one relevant gallery item (two in same-set mode).
Problem random_problem(Rng& rng, bool same_set) {
  const std::size_t n = 20 + rng.below(181);
  const int classes = 2 + static_cast<int>(rng.below(8));
  Problem p;
  p.g = oracle::random_matrix(n, 3, rng);
  p.gl.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.gl[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
  // A few exact duplicates exercise the tie rule.
  for (int d = 0; d < 3; ++d) {
    const std::size_t a = rng.below(n);
    const std::size_t b = rng.below(n);
    for (std::size_t c = 0; c < 3; ++c) p.g(a, c) = p.g(b, c);
  }
  if (same_set) {
    p.q = p.g;
    p.ql = p.gl;
  } else {
    p.q = oracle::random_matrix(5 + rng.below(20), 3, rng);
    p.ql = oracle::random_labels(p.q.rows(), classes, rng);
  }
  return p;
}

void expect_matches_oracle(const Problem& p, bool same_set) {
  const std::vector<std::size_t> ks{1, 2, 4, 8, 16, 1000};
  const RetrievalReport r = evaluate(p.q, p.ql, p.g, p.gl, ks, same_set);
  const oracle::Metrics o = oracle::retrieval_metrics(p.q, p.ql, p.g, p.gl, ks, same_set);
  EXPECT_EQ(r.recall_at, o.recall_at);
  EXPECT_EQ(r.r_precision, o.r_precision);
  EXPECT_EQ(r.map_at_r, o.map_at_r);
}

TEST(Evaluate, MatchesBruteForceOracle) {
  Rng rng(2);
  for (int t = 0; t < 25; ++t) {
    expect_matches_oracle(random_problem(rng, true), true);
    expect_matches_oracle(random_problem(rng, false), false);
  }
}

TEST(Evaluate, Invariances) {
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    Problem p = random_problem(rng, false);
    const RetrievalReport base = evaluate(p.q, p.ql, p.g, p.gl, kKs, false);
    // Recall is monotone, MAP@R <= RP, and recall at the full gallery is 1.
    double prev = 0.0;
    for (const auto& [k, v] : base.recall_at) {
      EXPECT_GE(v, prev);
      prev = v;
    }
    EXPECT_LE(base.map_at_r, base.r_precision + 1e-15);
    const std::vector<std::size_t> all{p.g.rows()};
    EXPECT_EQ(evaluate(p.q, p.ql, p.g, p.gl, all, false).recall_at.at(p.g.rows()), 1.0);

    // Positive scaling.
    Problem s = p;
    for (double& v : s.q.data()) v *= 3.5;
    for (double& v : s.g.data()) v *= 0.25;
    const RetrievalReport scaled = evaluate(s.q, s.ql, s.g, s.gl, kKs, false);
    EXPECT_EQ(scaled.recall_at, base.recall_at);
    EXPECT_EQ(scaled.map_at_r, base.map_at_r);

    // Gallery permutation, on a fresh gallery without planted duplicates so
    // the tie rule cannot reorder anything.
    Problem u = p;
    u.g = oracle::random_matrix(p.g.rows(), 3, rng);
    const RetrievalReport ub = evaluate(u.q, u.ql, u.g, u.gl, kKs, false);
    std::vector<std::size_t> perm(u.g.rows());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<std::size_t>(perm));
    Problem v = u;
    v.g = u.g.select_rows(perm);
    for (std::size_t i = 0; i < perm.size(); ++i) v.gl[i] = u.gl[perm[i]];
    const RetrievalReport pb = evaluate(v.q, v.ql, v.g, v.gl, kKs, false);
    EXPECT_EQ(pb.recall_at, ub.recall_at);
    EXPECT_DOUBLE_EQ(pb.map_at_r, ub.map_at_r);
    EXPECT_DOUBLE_EQ(pb.r_precision, ub.r_precision);
  }
}

TEST(EmbedDataset, IdentityEmptyAndMismatch) {
  Mlp net({2, 2});
  net.set_weight(0, 0, 0, 1.0);
  net.set_weight(0, 1, 1, 1.0);
  Dataset d;
  d.features = Matrix::from_rows({{1, 2}, {3, 4}});
  d.labels = {0, 0};
  EXPECT_EQ(embed_dataset(net, d), d.features);
  Dataset empty;
  empty.features = Matrix(0, 2);
  EXPECT_EQ(embed_dataset(net, empty).rows(), 0u);
  Dataset wrong;
  wrong.features = Matrix(1, 3, 1.0);
  wrong.labels = {0};
  EXPECT_THROW(embed_dataset(net, wrong), ContractError);
}

}  // namespace
}  // namespace hpl
