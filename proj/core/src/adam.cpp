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

#include "hpl/adam.hpp"

#include <cmath>

#include "hpl/errors.hpp"
#include "hpl/vector_math.hpp"

namespace hpl {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ContractError("adam_step: parameter, gradient and moment shapes differ");
  }
  if (!all_finite(grads)) throw TrainingError("adam_step: non-finite gradient");

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

}  // namespace hpl
