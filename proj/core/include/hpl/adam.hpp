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

#ifndef HPL_ADAM_HPP
#define HPL_ADAM_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hpl {

struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  AdamState() = default;
  AdamState(std::size_t num_params, double learning_rate)
      : lr(learning_rate), m(num_params, 0.0), v(num_params, 0.0) {}

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update of `params` in place.
/// Throws TrainingError on a non-finite gradient (params untouched) and
/// ContractError on a shape mismatch.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace hpl

#endif  // HPL_ADAM_HPP
