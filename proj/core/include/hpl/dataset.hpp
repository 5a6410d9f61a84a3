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

#ifndef HPL_DATASET_HPP
#define HPL_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hpl/matrix.hpp"
#include "hpl/rng.hpp"

namespace hpl {

/// Labeled feature vectors. Labels are contiguous class ids 0..C-1;
/// `gt_coarse`, when present, maps each class to a contiguous super-class id.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::optional<std::vector<int>> gt_coarse;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t input_dim() const noexcept { return features.cols(); }
  std::size_t num_classes() const;
  std::size_t num_super_classes() const;

  /// Throws ValidationError if any invariant is broken.
  void validate() const;

  /// Rows at `indices`, labels untouched.
  Dataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SyntheticSpec {
  int num_super = 8;
  int classes_per_super = 8;
  int samples_per_class = 20;
  int input_dim = 16;
  double super_spread = 10.0;
  double class_spread = 1.0;
  double noise = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Two-level isotropic Gaussian hierarchy. Classes are numbered in generation
/// order, so class c belongs to super-class c / classes_per_super.
Dataset generate_synthetic(const SyntheticSpec& spec);

/// Class-disjoint split: round(train_fraction * C) randomly chosen classes go
/// to `first`, the rest to `second`. Each side is re-indexed to contiguous
/// class (and super-class) ids in ascending order of the original ids.
std::pair<Dataset, Dataset> split_classes(const Dataset& dataset, double train_fraction, Rng& rng);

/// Text format: optional header "#coarse: c0 c1 ...", then one sample per
/// line, "label<TAB>f1<TAB>...<TAB>fD". Floats carry 17 significant digits.
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);

void save_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace hpl

#endif  // HPL_DATASET_HPP
