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

#include "hpl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "hpl/errors.hpp"
#include "hpl/vector_math.hpp"

namespace hpl {

Mlp::Mlp(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw ContractError("Mlp: need at least input and output dims");
  for (std::size_t d : dims_) {
    if (d == 0) throw ContractError("Mlp: layer dimensions must be positive");
  }
  std::size_t total = 0;
  for (std::size_t k = 0; k + 1 < dims_.size(); ++k) {
    offsets_.push_back(total);
    total += dims_[k] * dims_[k + 1] + dims_[k + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::glorot(std::vector<std::size_t> dims, Rng& rng) {
  Mlp net(std::move(dims));
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const double limit = std::sqrt(6.0 / static_cast<double>(net.in_dim(k) + net.out_dim(k)));
    const std::size_t begin = net.weight_offset(k);
    const std::size_t end = net.bias_offset(k);
    for (std::size_t i = begin; i < end; ++i) net.params_[i] = rng.uniform(-limit, limit);
  }
  return net;
}

void Mlp::set_weight(std::size_t layer, std::size_t out, std::size_t in, double v) {
  params_[weight_offset(layer) + out * in_dim(layer) + in] = v;
  ++version_;
}

void Mlp::set_bias(std::size_t layer, std::size_t out, double v) {
  params_[bias_offset(layer) + out] = v;
  ++version_;
}

std::span<double> Mlp::mutable_parameters() noexcept {
  ++version_;
  return params_;
}

bool Mlp::all_finite() const noexcept { return hpl::all_finite(params_); }

namespace {

// out = in * W^T + b, one row per sample.
Matrix affine(const Mlp& net, std::size_t layer, const Matrix& in) {
  const std::size_t n_in = net.in_dim(layer);
  const std::size_t n_out = net.out_dim(layer);
  const auto params = net.parameters();
  const double* w = params.data() + net.weight_offset(layer);
  const double* b = params.data() + net.bias_offset(layer);
  Matrix out(in.rows(), n_out);
  for (std::size_t r = 0; r < in.rows(); ++r) {
    const auto x = in.row(r);
    auto y = out.row(r);
    for (std::size_t o = 0; o < n_out; ++o) {
      const double* wrow = w + o * n_in;
      double s = b[o];
      for (std::size_t i = 0; i < n_in; ++i) s += wrow[i] * x[i];
      y[o] = s;
    }
  }
  return out;
}

void relu_inplace(Matrix& m) {
  for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
}

void check_input(const Mlp& net, const Matrix& batch) {
  if (batch.rows() > 0 && batch.cols() != net.input_dim()) {
    throw ContractError("forward: input has " + std::to_string(batch.cols()) +
                        " features, network expects " + std::to_string(net.input_dim()));
  }
  if (!batch.all_finite()) throw ContractError("forward: non-finite input");
}

}  // namespace

ForwardResult forward(const Mlp& net, const Matrix& batch_inputs) {
  if (batch_inputs.rows() == 0) throw ContractError("forward: empty batch");
  check_input(net, batch_inputs);
  ForwardResult result;
  Tape& tape = result.tape;
  tape.net_version = net.version();
  tape.dims = net.dims();
  tape.activations.push_back(batch_inputs);
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    Matrix pre = affine(net, k, tape.activations.back());
    if (k + 1 < net.num_layers()) {
      Matrix act = pre;
      relu_inplace(act);
      tape.pre_activations.push_back(std::move(pre));
      tape.activations.push_back(std::move(act));
    } else {
      result.embeddings = pre;
      tape.pre_activations.push_back(std::move(pre));
    }
  }
  return result;
}

Matrix embed(const Mlp& net, const Matrix& batch_inputs) {
  if (batch_inputs.rows() == 0) return Matrix(0, net.embed_dim());
  check_input(net, batch_inputs);
  Matrix h = batch_inputs;
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    h = affine(net, k, h);
    if (k + 1 < net.num_layers()) relu_inplace(h);
  }
  return h;
}

GradBuffer backward(const Mlp& net, const Tape& tape, const Matrix& d_embeddings) {
  if (tape.net_version != net.version() || tape.dims != net.dims() ||
      tape.activations.size() != net.num_layers()) {
    throw ContractError("backward: tape does not match the current network state");
  }
  const std::size_t batch = tape.activations.front().rows();
  if (d_embeddings.rows() != batch || d_embeddings.cols() != net.embed_dim()) {
    throw ContractError("backward: upstream gradient shape mismatch");
  }
  GradBuffer grads = GradBuffer::zeros_like(net);
  const auto params = net.parameters();

  // delta holds dL/d(pre-activation) of the current layer.
  Matrix delta = d_embeddings;
  for (std::size_t k = net.num_layers(); k-- > 0;) {
    const std::size_t n_in = net.in_dim(k);
    const std::size_t n_out = net.out_dim(k);
    const Matrix& input = tape.activations[k];
    double* dw = grads.values.data() + net.weight_offset(k);
    double* db = grads.values.data() + net.bias_offset(k);
    for (std::size_t r = 0; r < batch; ++r) {
      const auto x = input.row(r);
      const auto g = delta.row(r);
      for (std::size_t o = 0; o < n_out; ++o) {
        const double go = g[o];
        db[o] += go;
        double* dwrow = dw + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) dwrow[i] += go * x[i];
      }
    }
    if (k == 0) break;
    const double* w = params.data() + net.weight_offset(k);
    const Matrix& prev_pre = tape.pre_activations[k - 1];
    Matrix next(batch, n_in);
    for (std::size_t r = 0; r < batch; ++r) {
      const auto g = delta.row(r);
      auto out = next.row(r);
      for (std::size_t o = 0; o < n_out; ++o) {
        const double go = g[o];
        const double* wrow = w + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) out[i] += go * wrow[i];
      }
      const auto pre = prev_pre.row(r);
      for (std::size_t i = 0; i < n_in; ++i) {
        if (!(pre[i] > 0.0)) out[i] = 0.0;
      }
    }
    delta = std::move(next);
  }
  return grads;
}

}  // namespace hpl
