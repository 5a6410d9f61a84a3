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

#ifndef HPL_TRAINER_HPP
#define HPL_TRAINER_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hpl/adam.hpp"
#include "hpl/dataset.hpp"
#include "hpl/losses.hpp"
#include "hpl/mlp.hpp"
#include "hpl/pyramid.hpp"
#include "hpl/rng.hpp"

namespace hpl {

struct TrainConfig {
  int epochs = 30;
  int warmup_epochs = 3;
  int batch_size = 32;
  double lr = 1e-4;
  double proxy_lr_multiplier = 1.0;
  /// Iterations between pyramid refreshes; 0 means one epoch.
  int update_period = 0;
  /// {C, |P_1|, ...}; level_sizes[0] must equal the class count.
  std::vector<std::size_t> level_sizes;
  std::vector<double> weights{1.0, 0.1};
  LossConfig loss;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden_dims{64};
  std::size_t embed_dim = 32;
  /// Fixed class -> super-class map (two-level pyramids only).
  std::optional<std::vector<int>> gt_hierarchy;
  bool normalize_before_clustering = false;
  int kmeans_max_iters = 100;

  /// Throws ContractError if the config cannot train on `num_classes` classes.
  void validate(std::size_t num_classes) const;

  /// Ordered key=value echo; parse_config() inverts it exactly.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

TrainConfig parse_config(const std::map<std::string, std::string>& kv);

struct Batch {
  Matrix inputs;
  std::vector<int> labels;
  std::vector<std::size_t> indices;
};

/// Epoch-shuffled sampling without replacement. Each epoch is a fresh
/// permutation cut into consecutive batches; the last batch of an epoch is
/// short when batch_size does not divide the dataset size.
class BatchSampler {
 public:
  BatchSampler(std::size_t dataset_size, std::size_t batch_size, Rng rng);

  Batch next(const Dataset& dataset);

  std::size_t iterations_per_epoch() const noexcept {
    return (dataset_size_ + batch_size_ - 1) / batch_size_;
  }
  bool at_epoch_start() const noexcept { return cursor_ == 0; }

  const Rng& rng() const noexcept { return rng_; }
  const std::vector<std::size_t>& order() const noexcept { return order_; }
  std::size_t cursor() const noexcept { return cursor_; }
  void restore(Rng rng, std::vector<std::size_t> order, std::size_t cursor);

 private:
  std::size_t dataset_size_;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

struct IterationLog {
  int epoch = 0;                 // 0-based
  std::int64_t iteration = 0;    // 0-based, global
  double level0_loss = 0.0;      // unweighted base loss on the fine proxies
  double total_loss = 0.0;       // the optimized objective

  friend bool operator==(const IterationLog&, const IterationLog&) = default;
};

/// "epoch<TAB>iter<TAB>level0_loss<TAB>total_loss", 17 significant digits.
std::string format_log_line(const IterationLog& entry);

struct Checkpoint;

/**
 * Runs the online-clustering training loop.
 *
 * Warmup epochs optimize the network and fine proxies with the base loss
 * alone. The first post-warmup iteration clusters the fine proxies into the
 * coarse levels; from then on every iteration minimizes the weighted
 * hierarchical loss on propagated labels, and the coarse levels are refreshed
 * (assignments, then centroids) every `update_period` iterations. Coarse
 * proxies never receive gradient.
 *
 * Random streams for weights, fine proxies, batches and clustering are
 * derived from the seed independently, so changing the pyramid never perturbs
 * the batch order.
 */
class Trainer {
 public:
  Trainer(const Dataset& train, TrainConfig cfg);

  /// Resumes from a checkpoint. `train` must be the dataset it was trained on.
  static Trainer resume(const Dataset& train, const Checkpoint& checkpoint);

  /// One optimization step. Throws TrainingError on a non-finite loss.
  IterationLog step();

  /// Runs to the configured epoch count. `on_epoch_end` (if set) sees the
  /// trainer after each completed epoch.
  void run(const std::function<void(const Trainer&)>& on_epoch_end = {});

  bool finished() const noexcept { return epoch_ >= cfg_.epochs; }

  Checkpoint checkpoint() const;

  const TrainConfig& config() const noexcept { return cfg_; }
  const Mlp& network() const noexcept { return net_; }
  const ProxyPyramid& pyramid() const noexcept { return pyramid_; }
  bool pyramid_built() const noexcept { return pyramid_built_; }
  int epoch() const noexcept { return epoch_; }
  std::int64_t iteration() const noexcept { return iteration_; }
  std::int64_t update_period() const noexcept { return update_period_; }
  std::size_t iterations_per_epoch() const noexcept { return sampler_.iterations_per_epoch(); }
  const std::vector<IterationLog>& log() const noexcept { return log_; }

  /// Diagnostic hook: the most recent loss gradient on the fine proxies.
  const Matrix& last_proxy_gradient() const noexcept { return last_proxy_grad_; }

 private:
  struct ResumeTag {};
  Trainer(const Dataset& train, const Checkpoint& checkpoint, ResumeTag);

  void build_pyramid();

  const Dataset* data_;
  TrainConfig cfg_;
  Mlp net_;
  ProxyPyramid pyramid_;
  bool pyramid_built_ = false;
  AdamState net_opt_;
  AdamState proxy_opt_;
  BatchSampler sampler_;
  Rng cluster_rng_;
  int epoch_ = 0;
  std::int64_t iteration_ = 0;
  std::int64_t post_warmup_iteration_ = 0;
  std::int64_t update_period_ = 1;
  std::vector<IterationLog> log_;
  Matrix last_proxy_grad_;
};

struct TrainResult {
  Mlp network;
  ProxyPyramid pyramid;
  std::vector<IterationLog> log;
};

/// Convenience wrapper: constructs a Trainer and runs it to completion.
TrainResult train(const Dataset& dataset, const TrainConfig& cfg,
                  const std::function<void(const Trainer&)>& on_epoch_end = {});

/// Full training state. Round-trips bit-exactly through save/load.
struct Checkpoint {
  static constexpr char kMagic[3] = {'H', 'P', 'L'};
  static constexpr char kFormatVersion = '1';

  TrainConfig config;
  Mlp network{std::vector<std::size_t>{1, 1}};
  ProxyPyramid pyramid{Matrix(1, 1, 1.0)};
  bool pyramid_built = false;
  AdamState net_opt;
  AdamState proxy_opt;
  Rng sampler_rng;
  std::vector<std::size_t> sampler_order;
  std::size_t sampler_cursor = 0;
  Rng cluster_rng;
  int epoch = 0;
  std::int64_t iteration = 0;
  std::int64_t post_warmup_iteration = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Binary layout: "HPL" + version byte, u64 LE metadata length, UTF-8
/// key=value metadata lines (config echo, counters, assignments and tensor
/// declarations), little-endian f64 tensors in declared order, then a u64 LE
/// FNV-1a checksum of everything before it.
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
/// Throws CheckpointError (kIo, kCorrupt or kVersion); never returns partial state.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hpl

#endif  // HPL_TRAINER_HPP
