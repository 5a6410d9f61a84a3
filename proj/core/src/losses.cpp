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

#include "hpl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hpl/errors.hpp"

namespace hpl {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kProxyNca:
      return "nca";
    case LossKind::kProxyAnchor:
      return "anchor";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "nca" || name == "proxy_nca") return LossKind::kProxyNca;
  if (name == "anchor" || name == "proxy_anchor") return LossKind::kProxyAnchor;
  throw ContractError("unknown loss kind '" + std::string(name) + "'");
}

void LossConfig::validate() const {
  if (!std::isfinite(alpha) || !(alpha > 0.0)) throw ContractError("LossConfig: alpha must be finite and > 0");
  if (!std::isfinite(delta) || delta < 0.0) throw ContractError("LossConfig: delta must be finite and >= 0");
}

namespace {

// Unit-normalized rows plus their original norms.
struct NormalizedRows {
  Matrix unit;
  std::vector<double> norms;
};

NormalizedRows normalize_rows(const Matrix& m, const char* what) {
  NormalizedRows out{Matrix(m.rows(), m.cols()), std::vector<double>(m.rows())};
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto src = m.row(r);
    double sq = 0.0;
    for (double v : src) sq += v * v;
    const double n = std::sqrt(sq);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw DomainError(std::string(what) + " row " + std::to_string(r) + " has zero or non-finite norm");
    }
    out.norms[r] = n;
    auto dst = out.unit.row(r);
    for (std::size_t d = 0; d < src.size(); ++d) dst[d] = src[d] / n;
  }
  return out;
}

// Cosine similarity of every (sample, proxy) pair, B x C.
Matrix similarities(const Matrix& x_unit, const Matrix& p_unit) {
  Matrix s(x_unit.rows(), p_unit.rows());
  for (std::size_t i = 0; i < x_unit.rows(); ++i) {
    const auto x = x_unit.row(i);
    for (std::size_t c = 0; c < p_unit.rows(); ++c) {
      const auto p = p_unit.row(c);
      double acc = 0.0;
      for (std::size_t d = 0; d < x.size(); ++d) acc += x[d] * p[d];
      s(i, c) = acc;
    }
  }
  return s;
}

// Chain rule through s = x.p/(|x||p|):
//   ds/dx = (p_hat - s x_hat)/|x|,  ds/dp = (x_hat - s p_hat)/|p|.
// `g` is dL/ds (B x C). Columns of g that are all zero yield exactly-zero rows.
void backprop_cosine(const Matrix& g, const Matrix& s, const NormalizedRows& x,
                     const NormalizedRows& p, LossOutput& out) {
  const std::size_t batch = x.unit.rows();
  const std::size_t num_proxies = p.unit.rows();
  const std::size_t dim = x.unit.cols();
  out.d_embeddings = Matrix(batch, dim);
  out.d_proxies = Matrix(num_proxies, dim);
  for (std::size_t i = 0; i < batch; ++i) {
    auto dx = out.d_embeddings.row(i);
    const auto xh = x.unit.row(i);
    double gs = 0.0;
    for (std::size_t c = 0; c < num_proxies; ++c) {
      const double gic = g(i, c);
      if (gic == 0.0) continue;
      gs += gic * s(i, c);
      const auto ph = p.unit.row(c);
      for (std::size_t d = 0; d < dim; ++d) dx[d] += gic * ph[d];
    }
    for (std::size_t d = 0; d < dim; ++d) dx[d] = (dx[d] - gs * xh[d]) / x.norms[i];
  }
  for (std::size_t c = 0; c < num_proxies; ++c) {
    auto dp = out.d_proxies.row(c);
    const auto ph = p.unit.row(c);
    double gs = 0.0;
    bool touched = false;
    for (std::size_t i = 0; i < batch; ++i) {
      const double gic = g(i, c);
      if (gic == 0.0) continue;
      touched = true;
      gs += gic * s(i, c);
      const auto xh = x.unit.row(i);
      for (std::size_t d = 0; d < dim; ++d) dp[d] += gic * xh[d];
    }
    if (!touched) continue;
    for (std::size_t d = 0; d < dim; ++d) dp[d] = (dp[d] - gs * ph[d]) / p.norms[c];
  }
}

void check_inputs(const Matrix& embeddings, std::span<const int> labels, const Matrix& proxies,
                  const char* who) {
  if (embeddings.rows() == 0) throw ContractError(std::string(who) + ": empty batch");
  if (labels.size() != embeddings.rows()) {
    throw ContractError(std::string(who) + ": label count does not match batch size");
  }
  if (proxies.rows() == 0 || proxies.cols() != embeddings.cols()) {
    throw ContractError(std::string(who) + ": proxy matrix shape mismatch");
  }
  const int num_classes = static_cast<int>(proxies.rows());
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw ContractError(std::string(who) + ": label " + std::to_string(y) + " outside [0, " +
                          std::to_string(num_classes) + ")");
    }
  }
}

// log(1 + sum_k exp(z_k)) and its gradient weights exp(z_k)/(1 + sum exp(z)).
double log1p_sum_exp(std::span<const double> z, std::span<double> weights) {
  double m = 0.0;  // the implicit "1" is exp(0)
  for (double v : z) m = std::max(m, v);
  double denom = std::exp(-m);
  for (std::size_t k = 0; k < z.size(); ++k) {
    weights[k] = std::exp(z[k] - m);
    denom += weights[k];
  }
  for (double& w : weights) w /= denom;
  return m + std::log(denom);
}

}  // namespace

LossOutput proxy_nca_loss(const Matrix& embeddings, std::span<const int> labels,
                          const Matrix& proxies) {
  check_inputs(embeddings, labels, proxies, "proxy_nca_loss");
  if (proxies.rows() < 2) throw ContractError("proxy_nca_loss: needs at least 2 proxies");
  const auto x = normalize_rows(embeddings, "embedding");
  const auto p = normalize_rows(proxies, "proxy");
  const Matrix s = similarities(x.unit, p.unit);

  const std::size_t num_proxies = proxies.rows();
  Matrix g(embeddings.rows(), num_proxies);
  LossOutput out;
  for (std::size_t i = 0; i < embeddings.rows(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    double m = -INFINITY;
    for (std::size_t c = 0; c < num_proxies; ++c) {
      if (c != y) m = std::max(m, s(i, c));
    }
    double denom = 0.0;
    for (std::size_t c = 0; c < num_proxies; ++c) {
      if (c == y) continue;
      g(i, c) = std::exp(s(i, c) - m);
      denom += g(i, c);
    }
    for (std::size_t c = 0; c < num_proxies; ++c) {
      if (c != y) g(i, c) /= denom;
    }
    g(i, y) = -1.0;
    out.value += -s(i, y) + m + std::log(denom);
  }
  backprop_cosine(g, s, x, p, out);
  return out;
}

LossOutput proxy_anchor_loss(const Matrix& embeddings, std::span<const int> labels,
                             const Matrix& proxies, const LossConfig& cfg) {
  check_inputs(embeddings, labels, proxies, "proxy_anchor_loss");
  cfg.validate();
  const auto x = normalize_rows(embeddings, "embedding");
  const auto p = normalize_rows(proxies, "proxy");
  const Matrix s = similarities(x.unit, p.unit);

  const std::size_t batch = embeddings.rows();
  const std::size_t num_proxies = proxies.rows();

  std::size_t num_with_positive = 0;
  for (std::size_t c = 0; c < num_proxies; ++c) {
    for (int y : labels) {
      if (static_cast<std::size_t>(y) == c) {
        ++num_with_positive;
        break;
      }
    }
  }

  Matrix g(batch, num_proxies);
  LossOutput out;
  std::vector<double> z;
  std::vector<double> w;
  std::vector<std::size_t> members;
  double pos_sum = 0.0;
  double neg_sum = 0.0;
  for (std::size_t c = 0; c < num_proxies; ++c) {
    for (int sign : {+1, -1}) {
      // sign +1: positives, z = -alpha (s - delta); sign -1: negatives, z = alpha (s + delta).
      members.clear();
      z.clear();
      for (std::size_t i = 0; i < batch; ++i) {
        const bool positive = static_cast<std::size_t>(labels[i]) == c;
        if (positive != (sign > 0)) continue;
        members.push_back(i);
        z.push_back(sign > 0 ? -cfg.alpha * (s(i, c) - cfg.delta) : cfg.alpha * (s(i, c) + cfg.delta));
      }
      if (members.empty()) continue;
      w.assign(z.size(), 0.0);
      const double term = log1p_sum_exp(z, w);
      const double scale = sign > 0 ? 1.0 / static_cast<double>(num_with_positive)
                                    : 1.0 / static_cast<double>(num_proxies);
      (sign > 0 ? pos_sum : neg_sum) += term;
      const double dz_ds = sign > 0 ? -cfg.alpha : cfg.alpha;
      for (std::size_t k = 0; k < members.size(); ++k) {
        g(members[k], c) += scale * w[k] * dz_ds;
      }
    }
  }
  const double pos = num_with_positive > 0 ? pos_sum / static_cast<double>(num_with_positive) : 0.0;
  out.value = pos + neg_sum / static_cast<double>(num_proxies);
  backprop_cosine(g, s, x, p, out);
  return out;
}

LossOutput base_loss(const Matrix& embeddings, std::span<const int> labels, const Matrix& proxies,
                     const LossConfig& cfg) {
  switch (cfg.kind) {
    case LossKind::kProxyNca:
      return proxy_nca_loss(embeddings, labels, proxies);
    case LossKind::kProxyAnchor:
      return proxy_anchor_loss(embeddings, labels, proxies, cfg);
  }
  throw ContractError("base_loss: unknown loss kind");
}

LossOutput hpl_loss(const Matrix& embeddings, std::span<const std::vector<int>> level_labels,
                    std::span<const Matrix> level_proxies, std::span<const double> weights,
                    const LossConfig& cfg) {
  const std::size_t levels = level_proxies.size();
  if (levels == 0) throw ContractError("hpl_loss: need at least one level");
  if (level_labels.size() != levels || weights.size() != levels) {
    throw ContractError("hpl_loss: labels, proxies and weights must have one entry per level");
  }
  for (std::size_t l = 0; l < levels; ++l) {
    if (!std::isfinite(weights[l]) || weights[l] < 0.0) {
      throw ContractError("hpl_loss: level weights must be finite and >= 0");
    }
  }

  LossOutput out;
  out.d_embeddings = Matrix(embeddings.rows(), embeddings.cols());
  out.d_proxies = Matrix(level_proxies[0].rows(), level_proxies[0].cols());
  out.level_values.assign(levels, std::numeric_limits<double>::quiet_NaN());
  bool first = true;
  for (std::size_t l = 0; l < levels; ++l) {
    if (weights[l] == 0.0) {
      check_inputs(embeddings, level_labels[l], level_proxies[l], "hpl_loss");
      continue;
    }
    LossOutput level = base_loss(embeddings, level_labels[l], level_proxies[l], cfg);
    out.level_values[l] = level.value;
    const double w = weights[l];
    if (first) {
      // Assign rather than accumulate so a unit-weight single level is
      // bit-identical to the base loss.
      out.value = w * level.value;
      for (std::size_t k = 0; k < out.d_embeddings.size(); ++k) {
        out.d_embeddings.data()[k] = w * level.d_embeddings.data()[k];
      }
      first = false;
    } else {
      out.value += w * level.value;
      for (std::size_t k = 0; k < out.d_embeddings.size(); ++k) {
        out.d_embeddings.data()[k] += w * level.d_embeddings.data()[k];
      }
    }
    if (l == 0) {
      for (std::size_t k = 0; k < out.d_proxies.size(); ++k) {
        out.d_proxies.data()[k] = w * level.d_proxies.data()[k];
      }
    }
  }
  return out;
}

}  // namespace hpl
