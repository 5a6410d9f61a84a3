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
#include <vector>

#include "hpl/adam.hpp"
#include "hpl/errors.hpp"
#include "hpl/mlp.hpp"
#include "oracles.hpp"

namespace hpl {
namespace {

// Layer-by-layer scalar recomputation of the forward pass.
std::vector<double> scalar_forward(const Mlp& net, std::span<const double> x) {
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    std::vector<double> z(net.out_dim(l));
    for (std::size_t o = 0; o < net.out_dim(l); ++o) {
      double s = net.bias(l, o);
      for (std::size_t i = 0; i < net.in_dim(l); ++i) s += net.weight(l, o, i) * a[i];
      z[o] = (l + 1 < net.num_layers()) ? std::max(0.0, s) : s;
    }
    a = std::move(z);
  }
  return a;
}

Mlp identity_net(std::size_t d) {
  Mlp net({d, d});
  for (std::size_t i = 0; i < d; ++i) net.set_weight(0, i, i, 1.0);
  return net;
}

TEST(Forward, IdentityNetwork) {
  const Matrix in = Matrix::from_rows({{1, 2}});
  EXPECT_EQ(embed(identity_net(2), in), in);
}

TEST(Forward, ZeroInputGivesBias) {
  Rng rng(1);
  Mlp net = Mlp::glorot({3, 2}, rng);
  net.set_bias(0, 0, 0.25);
  net.set_bias(0, 1, -1.5);
  const Matrix out = embed(net, Matrix(1, 3, 0.0));
  EXPECT_EQ(out, Matrix::from_rows({{0.25, -1.5}}));
}

TEST(Forward, MatchesScalarRecomputation) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    Mlp net = Mlp::glorot({5, 7, 3}, rng);
    for (double& p : net.mutable_parameters()) p += 0.1 * rng.normal();
    const Matrix in = oracle::random_matrix(4, 5, rng);
    const Matrix out = embed(net, in);
    for (std::size_t r = 0; r < in.rows(); ++r) {
      const auto ref = scalar_forward(net, in.row(r));
      for (std::size_t c = 0; c < ref.size(); ++c) EXPECT_NEAR(out(r, c), ref[c], 1e-12);
    }
  }
}

TEST(Forward, DeterministicAndBatchInvariant) {
  Rng rng(3);
  Mlp net = Mlp::glorot({6, 8, 4}, rng);
  const Matrix in = oracle::random_matrix(10, 6, rng);
  const Matrix a = embed(net, in);
  EXPECT_EQ(a, embed(net, in));
  for (std::size_t r = 0; r < in.rows(); ++r) {
    const std::vector<std::size_t> one{r};
    const Matrix single = embed(net, in.select_rows(one));
    for (std::size_t c = 0; c < a.cols(); ++c) EXPECT_EQ(single(0, c), a(r, c));
  }
}

TEST(Forward, RejectsWrongWidthAndEmptyIsFine) {
  Mlp net({3, 2});
  EXPECT_THROW(forward(net, Matrix(2, 4)), ContractError);
  const Matrix empty = embed(net, Matrix(0, 3));
  EXPECT_EQ(empty.rows(), 0u);
  EXPECT_EQ(empty.cols(), 2u);
}

TEST(Forward, PositiveHomogeneityOnSignStableInputs) {
  // Zero biases make each layer positively homogeneous; scaling by c > 0
  // keeps every ReLU sign, so outputs scale by c exactly up to rounding.
  Rng rng(4);
  Mlp net = Mlp::glorot({4, 6, 6, 3}, rng);
  const Matrix in = oracle::random_matrix(8, 4, rng);
  const Matrix base = embed(net, in);
  for (double c : {0.5, 2.0, 7.25}) {
    Matrix scaled = in;
    for (double& v : scaled.data()) v *= c;
    const Matrix out = embed(net, scaled);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out.data()[i], c * base.data()[i], 1e-12 * c);
  }
}

TEST(Backward, IdentityNetworkOuterProduct) {
  Mlp net = identity_net(3);
  const Matrix in = Matrix::from_rows({{0.5, -1, 2}});
  const ForwardResult fr = forward(net, in);
  Matrix up(1, 3);
  up(0, 1) = 1.0;  // e_1
  const GradBuffer g = backward(net, fr.tape, up);
  for (std::size_t o = 0; o < 3; ++o) {
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(g.values[net.weight_offset(0) + o * 3 + i], o == 1 ? in(0, i) : 0.0);
    }
    EXPECT_EQ(g.values[net.bias_offset(0) + o], o == 1 ? 1.0 : 0.0);
  }
}

TEST(Backward, ZeroUpstreamGivesZeroGradient) {
  Rng rng(5);
  Mlp net = Mlp::glorot({4, 5, 2}, rng);
  const ForwardResult fr = forward(net, oracle::random_matrix(3, 4, rng));
  const GradBuffer g = backward(net, fr.tape, Matrix(3, 2));
  for (double v : g.values) EXPECT_EQ(v, 0.0);
}

TEST(Backward, StaleTapeIsRejected) {
  Rng rng(6);
  Mlp net = Mlp::glorot({4, 5, 2}, rng);
  const ForwardResult fr = forward(net, oracle::random_matrix(3, 4, rng));
  net.mutable_parameters()[0] += 1.0;
  EXPECT_THROW(backward(net, fr.tape, Matrix(3, 2)), ContractError);
  Mlp other = Mlp::glorot({4, 6, 2}, rng);
  EXPECT_THROW(backward(other, fr.tape, Matrix(3, 2)), ContractError);
  const ForwardResult fresh = forward(net, oracle::random_matrix(3, 4, rng));
  EXPECT_THROW(backward(net, fresh.tape, Matrix(2, 2)), ContractError);
}

// Linear functional L = sum(G .* f(X)) so dL/d(output) = G.
double projected_output(const Mlp& net, const Matrix& in, const Matrix& up) {
  const Matrix out = embed(net, in);
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out.data()[i] * up.data()[i];
  return s;
}

TEST(Backward, MatchesFiniteDifferencesOn50RandomTriples) {
  Rng rng(7);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t in_dim = 2 + rng.below(5);
    const std::size_t hidden = 2 + rng.below(6);
    const std::size_t out_dim = 1 + rng.below(4);
    Mlp net = Mlp::glorot({in_dim, hidden, out_dim}, rng);
    // Nonzero biases so the check covers them too.
    for (std::size_t o = 0; o < hidden; ++o) net.set_bias(0, o, 0.3 * rng.normal());
    const Matrix in = oracle::random_matrix(1 + rng.below(5), in_dim, rng);
    const Matrix up = oracle::random_matrix(in.rows(), out_dim, rng);
    const GradBuffer g = backward(net, forward(net, in).tape, up);

    const auto params = net.parameters();
    Matrix analytic(1, params.size(), std::vector<double>(g.values.begin(), g.values.end()));
    Matrix theta(1, params.size(), std::vector<double>(params.begin(), params.end()));
    Mlp probe = net;
    const Matrix numeric = oracle::finite_difference(
        [&] {
          auto p = probe.mutable_parameters();
          std::copy(theta.data().begin(), theta.data().end(), p.begin());
          return projected_output(probe, in, up);
        },
        theta);
    worst = std::max(worst, oracle::max_relative_error(analytic, numeric));
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Backward, InputGradientNotNeededButShapesMatch) {
  Rng rng(8);
  Mlp net = Mlp::glorot({3, 4, 2}, rng);
  const GradBuffer z = GradBuffer::zeros_like(net);
  EXPECT_EQ(z.values.size(), net.parameters().size());
}

TEST(Glorot, WithinBoundsAndZeroBias) {
  Rng rng(9);
  const Mlp net = Mlp::glorot({16, 64, 32}, rng);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(net.in_dim(l) + net.out_dim(l)));
    for (std::size_t o = 0; o < net.out_dim(l); ++o) {
      EXPECT_EQ(net.bias(l, o), 0.0);
      for (std::size_t i = 0; i < net.in_dim(l); ++i) {
        EXPECT_LE(std::abs(net.weight(l, o, i)), bound);
      }
    }
  }
  Rng again(9);
  EXPECT_EQ(Mlp::glorot({16, 64, 32}, again), net);
}

TEST(Adam, ZeroGradientFreshStateLeavesParams) {
  std::vector<double> w{1.0, -2.0, 3.5};
  const std::vector<double> before = w;
  AdamState st(3, 0.1);
  adam_step(w, std::vector<double>(3, 0.0), st);
  EXPECT_EQ(w, before);
  EXPECT_EQ(st.t, 1);
}

TEST(Adam, FirstStepClosedForm) {
  std::vector<double> w{0.0};
  AdamState st(1, 0.1);
  adam_step(w, std::vector<double>{1.0}, st);
  EXPECT_NEAR(w[0], -0.1 * 1.0 / (1.0 + 1e-8), 1e-15);
}

TEST(Adam, ScalarSimulationOnQuadratic) {
  // Independent scalar simulation of the same recurrence, then compare.
  std::vector<double> w{1.0};
  AdamState st(1, 0.05);
  double ref = 1.0;
  double m = 0.0;
  double v = 0.0;
  for (int t = 1; t <= 100; ++t) {
    adam_step(w, std::vector<double>{2.0 * w[0]}, st);
    const double g = 2.0 * ref;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    ref -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
  }
  EXPECT_NEAR(w[0], ref, 1e-12);
  EXPECT_LT(std::abs(w[0]), 0.2);
}

TEST(Adam, RejectsNonFiniteAndMismatch) {
  std::vector<double> w{1.0, 2.0};
  AdamState st(2, 0.1);
  EXPECT_THROW(adam_step(w, std::vector<double>{1.0, std::nan("")}, st), TrainingError);
  EXPECT_EQ(w, (std::vector<double>{1.0, 2.0}));
  EXPECT_THROW(adam_step(w, std::vector<double>{1.0}, st), ContractError);
}

}  // namespace
}  // namespace hpl
