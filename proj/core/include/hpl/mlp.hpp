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

#ifndef HPL_MLP_HPP
#define HPL_MLP_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hpl/matrix.hpp"
#include "hpl/rng.hpp"

namespace hpl {

/**
 * Feedforward embedding network: affine layers with ReLU between them and an
 * identity output layer. Outputs are not normalized.
 *
 * All parameters live in one flat buffer, laid out layer by layer as
 * W_k (out x in, row-major) followed by b_k (out). GradBuffer and the Adam
 * moments share that layout, so an optimizer step is a flat loop.
 */
class Mlp {
 public:
  /// `dims` = {input_dim, hidden..., embed_dim}; at least two entries, all positive.
  /// Parameters start at zero.
  explicit Mlp(std::vector<std::size_t> dims);

  /// Uniform(-sqrt(6/(in+out)), +sqrt(6/(in+out))) weights, zero biases.
  static Mlp glorot(std::vector<std::size_t> dims, Rng& rng);

  std::size_t input_dim() const noexcept { return dims_.front(); }
  std::size_t embed_dim() const noexcept { return dims_.back(); }
  std::size_t num_layers() const noexcept { return dims_.size() - 1; }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }

  std::size_t in_dim(std::size_t layer) const { return dims_[layer]; }
  std::size_t out_dim(std::size_t layer) const { return dims_[layer + 1]; }

  double weight(std::size_t layer, std::size_t out, std::size_t in) const {
    return params_[weight_offset(layer) + out * in_dim(layer) + in];
  }
  double bias(std::size_t layer, std::size_t out) const {
    return params_[bias_offset(layer) + out];
  }
  void set_weight(std::size_t layer, std::size_t out, std::size_t in, double v);
  void set_bias(std::size_t layer, std::size_t out, double v);

  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + in_dim(layer) * out_dim(layer);
  }

  std::span<const double> parameters() const noexcept { return params_; }
  /// Mutable access bumps the version, invalidating outstanding tapes.
  std::span<double> mutable_parameters() noexcept;

  std::uint64_t version() const noexcept { return version_; }
  bool all_finite() const noexcept;

  /// Bitwise parameter and shape equality; the version is ignored.
  friend bool operator==(const Mlp& a, const Mlp& b) {
    return a.dims_ == b.dims_ && a.params_ == b.params_;
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  std::uint64_t version_ = 0;
};

/// dL/dtheta in the Mlp's flat layout.
struct GradBuffer {
  std::vector<double> values;

  static GradBuffer zeros_like(const Mlp& net) {
    return GradBuffer{std::vector<double>(net.parameters().size(), 0.0)};
  }
};

/// Activations recorded by forward(); consumed by backward().
struct Tape {
  std::uint64_t net_version = 0;
  std::vector<std::size_t> dims;
  /// activations[k] is the input to layer k; activations[0] is the batch.
  std::vector<Matrix> activations;
  /// pre_activations[k] is the affine output of layer k.
  std::vector<Matrix> pre_activations;
};

struct ForwardResult {
  Matrix embeddings;
  Tape tape;
};

/// Embeds a batch (B x input_dim, B >= 1).
ForwardResult forward(const Mlp& net, const Matrix& batch_inputs);

/// Embeds without recording a tape. Bit-identical to forward().embeddings.
Matrix embed(const Mlp& net, const Matrix& batch_inputs);

/// Parameter gradient for an upstream gradient on the embeddings.
/// Throws ContractError if `tape` came from a different network state.
GradBuffer backward(const Mlp& net, const Tape& tape, const Matrix& d_embeddings);

}  // namespace hpl

#endif  // HPL_MLP_HPP
