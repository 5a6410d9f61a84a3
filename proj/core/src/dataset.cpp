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

#include "hpl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>

#include "hpl/errors.hpp"

namespace hpl {

namespace {

std::size_t count_ids(std::span<const int> ids) {
  if (ids.empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(ids.begin(), ids.end())) + 1;
}

// Maps the distinct values of `ids` to 0..k-1 in ascending order.
std::map<int, int> dense_index(std::span<const int> ids) {
  std::set<int> distinct(ids.begin(), ids.end());
  std::map<int, int> index;
  int next = 0;
  for (int v : distinct) index[v] = next++;
  return index;
}

}  // namespace

std::size_t Dataset::num_classes() const { return count_ids(labels); }

std::size_t Dataset::num_super_classes() const {
  return gt_coarse ? count_ids(*gt_coarse) : 0;
}

void Dataset::validate() const {
  if (features.rows() != labels.size()) {
    throw ValidationError("dataset: " + std::to_string(features.rows()) + " feature rows but " +
                          std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) return;
  std::vector<bool> seen(num_classes(), false);
  for (int y : labels) {
    if (y < 0) throw ValidationError("dataset: negative label " + std::to_string(y));
    seen[static_cast<std::size_t>(y)] = true;
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) {
      throw ValidationError("dataset: labels are not contiguous, class " + std::to_string(c) +
                            " has no samples");
    }
  }
  if (gt_coarse) {
    if (gt_coarse->size() != seen.size()) {
      throw ValidationError("dataset: coarse map has " + std::to_string(gt_coarse->size()) +
                            " entries for " + std::to_string(seen.size()) + " classes");
    }
    std::vector<bool> super_seen(num_super_classes(), false);
    for (int s : *gt_coarse) {
      if (s < 0) throw ValidationError("dataset: negative super-class id");
      super_seen[static_cast<std::size_t>(s)] = true;
    }
    if (std::find(super_seen.begin(), super_seen.end(), false) != super_seen.end()) {
      throw ValidationError("dataset: super-class ids are not contiguous");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features = features.select_rows(indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(labels.at(i));
  out.gt_coarse = gt_coarse;
  return out;
}

void SyntheticSpec::validate() const {
  if (num_super < 1 || classes_per_super < 1 || samples_per_class < 1 || input_dim < 1) {
    throw ContractError("SyntheticSpec: counts and dimension must be positive");
  }
  if (!(noise > 0.0 && class_spread > noise && super_spread > class_spread) ||
      !std::isfinite(super_spread)) {
    throw ContractError("SyntheticSpec: need super_spread > class_spread > noise > 0");
  }
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto dim = static_cast<std::size_t>(spec.input_dim);
  const auto num_classes = static_cast<std::size_t>(spec.num_super * spec.classes_per_super);
  const auto per_class = static_cast<std::size_t>(spec.samples_per_class);

  Dataset out;
  out.features = Matrix(num_classes * per_class, dim);
  out.labels.reserve(num_classes * per_class);
  out.gt_coarse = std::vector<int>();
  std::vector<double> super_center(dim);
  std::vector<double> class_center(dim);
  std::size_t row = 0;
  for (int s = 0; s < spec.num_super; ++s) {
    for (double& v : super_center) v = rng.normal(0.0, spec.super_spread);
    for (int k = 0; k < spec.classes_per_super; ++k) {
      const int label = s * spec.classes_per_super + k;
      out.gt_coarse->push_back(s);
      for (std::size_t d = 0; d < dim; ++d) class_center[d] = super_center[d] + rng.normal(0.0, spec.class_spread);
      for (std::size_t n = 0; n < per_class; ++n, ++row) {
        auto x = out.features.row(row);
        for (std::size_t d = 0; d < dim; ++d) x[d] = class_center[d] + rng.normal(0.0, spec.noise);
        out.labels.push_back(label);
      }
    }
  }
  return out;
}

std::pair<Dataset, Dataset> split_classes(const Dataset& dataset, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ContractError("split_classes: train_fraction must lie in (0, 1)");
  }
  dataset.validate();
  const std::size_t num_classes = dataset.num_classes();
  const auto num_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(num_classes)));
  if (num_train == 0 || num_train >= num_classes) {
    throw ContractError("split_classes: fraction " + std::to_string(train_fraction) + " of " +
                        std::to_string(num_classes) + " classes leaves one side empty");
  }
  std::vector<int> order(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) order[c] = static_cast<int>(c);
  rng.shuffle(std::span<int>(order));
  std::vector<bool> is_train(num_classes, false);
  for (std::size_t i = 0; i < num_train; ++i) is_train[static_cast<std::size_t>(order[i])] = true;

  auto build = [&](bool train_side) {
    std::vector<std::size_t> rows;
    std::vector<int> classes;
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (is_train[c] == train_side) classes.push_back(static_cast<int>(c));
    }
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (is_train[static_cast<std::size_t>(dataset.labels[i])] == train_side) rows.push_back(i);
    }
    const auto class_index = dense_index(classes);
    Dataset side;
    side.features = dataset.features.select_rows(rows);
    side.labels.reserve(rows.size());
    for (std::size_t i : rows) side.labels.push_back(class_index.at(dataset.labels[i]));
    if (dataset.gt_coarse) {
      std::vector<int> supers;
      for (int c : classes) supers.push_back((*dataset.gt_coarse)[static_cast<std::size_t>(c)]);
      const auto super_index = dense_index(supers);
      std::vector<int> coarse;
      for (int s : supers) coarse.push_back(super_index.at(s));
      side.gt_coarse = std::move(coarse);
    }
    return side;
  };
  return {build(true), build(false)};
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  dataset.validate();
  if (dataset.gt_coarse) {
    out << "#coarse:";
    for (int s : *dataset.gt_coarse) out << ' ' << s;
    out << '\n';
  }
  char buf[64];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << dataset.labels[i];
    for (double v : dataset.features.row(i)) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 16);
      out << '\t' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
}

namespace {

template <typename T>
bool parse_number(std::string_view text, T& value) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  Dataset out;
  std::vector<double> values;
  std::size_t dim = 0;
  bool have_dim = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view kCoarse = "#coarse:";
      if (line.substr(0, kCoarse.size()) != kCoarse) continue;
      if (out.gt_coarse || have_dim) throw ParseError(line_no, "coarse header must come first, once");
      std::vector<int> coarse;
      for (std::string_view tok : split(line.substr(kCoarse.size()), ' ')) {
        if (tok.empty()) continue;
        int s = 0;
        if (!parse_number(tok, s)) throw ParseError(line_no, "bad super-class id '" + std::string(tok) + "'");
        coarse.push_back(s);
      }
      out.gt_coarse = std::move(coarse);
      continue;
    }
    const auto fields = split(line, '\t');
    int label = 0;
    if (!parse_number(fields[0], label)) {
      throw ParseError(line_no, "bad label '" + std::string(fields[0]) + "'");
    }
    const std::size_t n = fields.size() - 1;
    if (!have_dim) {
      if (n == 0) throw ParseError(line_no, "record has no features");
      dim = n;
      have_dim = true;
    } else if (n != dim) {
      throw ParseError(line_no, "expected " + std::to_string(dim) + " features, found " + std::to_string(n));
    }
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0.0;
      if (!parse_number(fields[k], v) || !std::isfinite(v)) {
        throw ParseError(line_no, "bad feature value '" + std::string(fields[k]) + "'");
      }
      values.push_back(v);
    }
    out.labels.push_back(label);
  }
  out.features = Matrix(out.labels.size(), dim, std::move(values));
  out.validate();
  return out;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_dataset(out, dataset);
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return read_dataset(in);
}

}  // namespace hpl
