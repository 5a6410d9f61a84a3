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

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "hpl/dataset.hpp"
#include "hpl/errors.hpp"
#include "hpl/kmeans.hpp"

namespace hpl {
namespace {

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.num_super = 2;
  s.classes_per_super = 2;
  s.samples_per_class = 3;
  s.input_dim = 4;
  return s;
}

TEST(Generate, Counting) {
  const Dataset d = generate_synthetic(small_spec());
  EXPECT_EQ(d.size(), 12u);
  EXPECT_EQ(d.num_classes(), 4u);
  EXPECT_EQ(d.input_dim(), 4u);
  ASSERT_TRUE(d.gt_coarse.has_value());
  EXPECT_EQ(*d.gt_coarse, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(d.num_super_classes(), 2u);
  EXPECT_NO_THROW(d.validate());
}

TEST(Generate, DeterministicUnderSeed) {
  EXPECT_EQ(generate_synthetic(small_spec()), generate_synthetic(small_spec()));
  SyntheticSpec other = small_spec();
  other.seed = 1;
  EXPECT_NE(generate_synthetic(other), generate_synthetic(small_spec()));
}

TEST(Generate, SpecValidation) {
  SyntheticSpec s = small_spec();
  s.class_spread = s.super_spread;
  EXPECT_THROW(s.validate(), ContractError);
  s = small_spec();
  s.noise = 0.0;
  EXPECT_THROW(s.validate(), ContractError);
  s = small_spec();
  s.classes_per_super = 0;
  EXPECT_THROW(s.validate(), ContractError);
}

// Class centers estimated as per-class sample means.
Matrix class_means(const Dataset& d) {
  Matrix m(d.num_classes(), d.input_dim());
  std::vector<int> n(d.num_classes(), 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto c = static_cast<std::size_t>(d.labels[i]);
    ++n[c];
    for (std::size_t k = 0; k < d.input_dim(); ++k) m(c, k) += d.features(i, k);
  }
  for (std::size_t c = 0; c < m.rows(); ++c) {
    for (double& v : m.row(c)) v /= n[c];
  }
  return m;
}

TEST(Generate, HierarchyIsVisibleInDistances) {
  SyntheticSpec s;
  s.num_super = 4;
  s.classes_per_super = 4;
  s.noise = 0.1;
  const Dataset d = generate_synthetic(s);
  const Matrix m = class_means(d);
  double intra = 0.0;
  double inter = 0.0;
  int ni = 0;
  int ne = 0;
  for (std::size_t a = 0; a < m.rows(); ++a) {
    for (std::size_t b = a + 1; b < m.rows(); ++b) {
      double dd = 0.0;
      for (std::size_t k = 0; k < m.cols(); ++k) dd += (m(a, k) - m(b, k)) * (m(a, k) - m(b, k));
      if ((*d.gt_coarse)[a] == (*d.gt_coarse)[b]) {
        intra += std::sqrt(dd);
        ++ni;
      } else {
        inter += std::sqrt(dd);
        ++ne;
      }
    }
  }
  EXPECT_GT(inter / ne, intra / ni);
}

TEST(Generate, KMeansRecoversSuperClassesOnSeparatedInstance) {
  SyntheticSpec s;
  s.num_super = 4;
  s.classes_per_super = 4;
  s.super_spread = 20.0;
  s.class_spread = 1.0;
  s.noise = 0.1;
  const Dataset d = generate_synthetic(s);
  Rng rng(3);
  const KMeansResult r = kmeans(class_means(d), 4, rng);
  // Same partition up to relabeling (adjusted Rand index 1).
  for (std::size_t a = 0; a < 16; ++a) {
    for (std::size_t b = 0; b < 16; ++b) {
      EXPECT_EQ(r.assignment[a] == r.assignment[b], (*d.gt_coarse)[a] == (*d.gt_coarse)[b]);
    }
  }
}

TEST(Split, PartitionsClassesAndReindexes) {
  SyntheticSpec s = small_spec();
  const Dataset d = generate_synthetic(s);
  Rng rng(4);
  const auto [train, test] = split_classes(d, 0.5, rng);
  EXPECT_EQ(train.num_classes(), 2u);
  EXPECT_EQ(test.num_classes(), 2u);
  EXPECT_EQ(train.size() + test.size(), d.size());
  EXPECT_NO_THROW(train.validate());
  EXPECT_NO_THROW(test.validate());

  // Every original row lands on exactly one side, with its class mapped consistently.
  std::multiset<std::vector<double>> all;
  for (std::size_t i = 0; i < d.size(); ++i) all.insert({d.features.row(i).begin(), d.features.row(i).end()});
  std::multiset<std::vector<double>> seen;
  for (const Dataset* side : {&train, &test}) {
    for (std::size_t i = 0; i < side->size(); ++i) {
      seen.insert({side->features.row(i).begin(), side->features.row(i).end()});
    }
  }
  EXPECT_EQ(all, seen);
}

TEST(Split, PreservesSuperGrouping) {
  SyntheticSpec s;
  s.num_super = 3;
  s.classes_per_super = 4;
  s.samples_per_class = 2;
  const Dataset d = generate_synthetic(s);
  const Matrix centers = class_means(d);
  Rng rng(5);
  const auto [train, test] = split_classes(d, 0.5, rng);
  // Recover the original class of each new class through its feature mean.
  for (const Dataset* side : {&train, &test}) {
    const Matrix m = class_means(*side);
    std::vector<int> original(side->num_classes());
    for (std::size_t c = 0; c < m.rows(); ++c) {
      for (std::size_t o = 0; o < centers.rows(); ++o) {
        if (std::equal(m.row(c).begin(), m.row(c).end(), centers.row(o).begin())) original[c] = static_cast<int>(o);
      }
    }
    for (std::size_t a = 0; a < m.rows(); ++a) {
      for (std::size_t b = 0; b < m.rows(); ++b) {
        EXPECT_EQ((*side->gt_coarse)[a] == (*side->gt_coarse)[b],
                  (*d.gt_coarse)[static_cast<std::size_t>(original[a])] ==
                      (*d.gt_coarse)[static_cast<std::size_t>(original[b])]);
      }
    }
  }
}

TEST(Split, Errors) {
  const Dataset d = generate_synthetic(small_spec());
  Rng rng(6);
  EXPECT_THROW(split_classes(d, 0.0, rng), ContractError);
  EXPECT_THROW(split_classes(d, 1.0, rng), ContractError);
  EXPECT_THROW(split_classes(d, 0.1, rng), ContractError);  // rounds to zero train classes
}

TEST(DatasetIo, RoundTripIsLossless) {
  const Dataset d = generate_synthetic(small_spec());
  std::stringstream ss;
  write_dataset(ss, d);
  EXPECT_EQ(read_dataset(ss), d);

  Dataset plain = d;
  plain.gt_coarse.reset();
  std::stringstream ps;
  write_dataset(ps, plain);
  EXPECT_EQ(ps.str().find("#coarse"), std::string::npos);
  EXPECT_EQ(read_dataset(ps), plain);

  const auto path = std::filesystem::temp_directory_path() / "hpl_dataset_roundtrip.tsv";
  save_dataset(path, d);
  EXPECT_EQ(load_dataset(path), d);
  std::filesystem::remove(path);
}

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in);
}

TEST(DatasetIo, Errors) {
  EXPECT_THROW(parse("0\t1\t2\n2\t3\t4\n"), ValidationError);  // class 1 missing
  try {
    parse("0\t1\t2\n1\t3\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse("0\t1\tx\n"), ParseError);
  EXPECT_THROW(parse("a\t1\n"), ParseError);
  EXPECT_THROW(parse("0\t1\n#coarse: 0\n"), ParseError);
  EXPECT_THROW(parse("#coarse: 0 2\n0\t1\n1\t2\n"), ValidationError);
  EXPECT_THROW(load_dataset("/nonexistent/hpl/data.tsv"), std::runtime_error);
}

TEST(DatasetIo, HeaderAndBlankLines) {
  const Dataset d = parse("#coarse: 0 0\n0\t1.5\t2\n\n1\t-3\t4e-2\n");
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.features(1, 1), 4e-2);
  EXPECT_EQ(*d.gt_coarse, (std::vector<int>{0, 0}));
}

}  // namespace
}  // namespace hpl
