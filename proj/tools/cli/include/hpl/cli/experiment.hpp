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

#ifndef HPL_CLI_EXPERIMENT_HPP
#define HPL_CLI_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hpl/dataset.hpp"
#include "hpl/retrieval.hpp"
#include "hpl/trainer.hpp"

namespace hpl::cli {

struct EpochMetrics {
  int epoch = 0;  // 1-based count of completed epochs
  double recall_at_1 = 0.0;
  double map_at_r = 0.0;
  double r_precision = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

/// Everything needed to reproduce and compare one training run.
struct RunRecord {
  TrainConfig config;
  std::vector<EpochMetrics> epochs;
  std::optional<RetrievalReport> final_report;
  double wall_seconds = 0.0;
  std::vector<IterationLog> log;
};

struct EvalOptions {
  std::vector<std::size_t> ks{1, 2, 4, 8};
  /// Evaluate on the eval set after every epoch, not only at the end.
  bool per_epoch = true;
};

/// Same-set retrieval evaluation (each sample queries all others).
RetrievalReport evaluate_same_set(const Mlp& net, const Dataset& data, std::span<const std::size_t> ks);

/// Trains on `train`; when `eval` is given, scores it with the single-set
/// protocol. `trainer_out`, if non-null, receives the finished trainer state
/// as a checkpoint.
RunRecord run_training(const Dataset& train, const Dataset* eval, const TrainConfig& cfg,
                       const EvalOptions& opts = {}, Checkpoint* trainer_out = nullptr);

enum class SweepParam { kOmega1, kCoarse };

/// Returns `base` with one swept hyperparameter replaced. `num_classes` is
/// the training class count; a coarse size of 0 means a single-level run.
TrainConfig apply_sweep_value(TrainConfig base, SweepParam param, double value, std::size_t num_classes);

struct SweepRun {
  double value = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double recall_at_1 = 0.0;
  double map_at_r = 0.0;
  double r_precision = 0.0;
};

struct SweepRow {
  double value = 0.0;
  std::size_t completed = 0;
  std::size_t failed = 0;
  double mean_recall_at_1 = 0.0;
  double ci95_recall_at_1 = 0.0;
  double mean_map_at_r = 0.0;
  double ci95_map_at_r = 0.0;
};

struct SweepResult {
  std::vector<SweepRun> runs;  // ordered by (value, seed)
  std::vector<SweepRow> rows;  // one per value, in input order
};

/// Runs train+eval for every (value, repeat). Repeat r uses seed
/// `base.seed + r` for every value, so rows form paired comparisons. A failed
/// run is recorded and the sweep carries on.
SweepResult run_sweep(const Dataset& train, const Dataset& eval, const TrainConfig& base,
                      SweepParam param, const std::vector<double>& values, int repeats);

/// Mean and half-width of the normal-approximation 95% interval.
std::pair<double, double> mean_ci95(const std::vector<double>& samples);

}  // namespace hpl::cli

#endif  // HPL_CLI_EXPERIMENT_HPP
