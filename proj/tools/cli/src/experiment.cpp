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

#include "hpl/cli/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <tuple>

#include "hpl/errors.hpp"
#include "hpl/parallel.hpp"

namespace hpl::cli {

RetrievalReport evaluate_same_set(const Mlp& net, const Dataset& data, std::span<const std::size_t> ks) {
  const Matrix embs = embed_dataset(net, data);
  return evaluate(embs, data.labels, embs, data.labels, ks, /*same_set=*/true);
}

RunRecord run_training(const Dataset& train, const Dataset* eval, const TrainConfig& cfg,
                       const EvalOptions& opts, Checkpoint* trainer_out) {
  const auto start = std::chrono::steady_clock::now();
  RunRecord record;
  record.config = cfg;
  Trainer trainer(train, cfg);
  std::vector<std::size_t> ks = opts.ks;
  if (std::find(ks.begin(), ks.end(), std::size_t{1}) == ks.end()) ks.insert(ks.begin(), 1);
  auto score = [&](const Trainer& t) {
    RetrievalReport report = evaluate_same_set(t.network(), *eval, ks);
    record.epochs.push_back(EpochMetrics{t.epoch(), report.recall_at.at(1), report.map_at_r, report.r_precision});
    return report;
  };
  std::function<void(const Trainer&)> hook;
  if (eval && opts.per_epoch) hook = [&](const Trainer& t) { score(t); };
  trainer.run(hook);
  if (eval) {
    if (opts.per_epoch && !record.epochs.empty()) {
      record.final_report = evaluate_same_set(trainer.network(), *eval, opts.ks);
    } else {
      score(trainer);
      record.final_report = evaluate_same_set(trainer.network(), *eval, opts.ks);
    }
  }
  record.log = trainer.log();
  if (trainer_out) *trainer_out = trainer.checkpoint();
  record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

TrainConfig apply_sweep_value(TrainConfig base, SweepParam param, double value, std::size_t num_classes) {
  if (!std::isfinite(value) || value < 0.0) throw ContractError("sweep values must be finite and >= 0");
  switch (param) {
    case SweepParam::kOmega1:
      if (base.level_sizes.size() < 2 || base.weights.size() < 2) {
        throw ContractError("an omega1 sweep needs a coarse level (set --coarse > 0)");
      }
      base.weights[1] = value;
      break;
    case SweepParam::kCoarse: {
      if (value != std::floor(value)) throw ContractError("coarse proxy counts must be integers");
      const double w0 = base.weights.empty() ? 1.0 : base.weights[0];
      const double w1 = base.weights.size() > 1 ? base.weights[1] : 0.1;
      const auto coarse = static_cast<std::size_t>(value);
      if (coarse == 0) {
        base.level_sizes = {num_classes};
        base.weights = {w0};
        base.gt_hierarchy.reset();
      } else {
        base.level_sizes = {num_classes, coarse};
        base.weights = {w0, w1};
      }
      break;
    }
  }
  return base;
}

std::pair<double, double> mean_ci95(const std::vector<double>& samples) {
  if (samples.empty()) return {std::nan(""), std::nan("")};
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double n = static_cast<double>(samples.size());
  const double mean = sum / n;
  if (samples.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double v : samples) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / (n - 1.0));
  return {mean, 1.96 * sd / std::sqrt(n)};
}

SweepResult run_sweep(const Dataset& train, const Dataset& eval, const TrainConfig& base,
                      SweepParam param, const std::vector<double>& values, int repeats) {
  if (values.empty()) throw ContractError("sweep: need at least one value");
  if (repeats < 1) throw ContractError("sweep: repeats must be >= 1");
  SweepResult result;
  for (double v : values) {
    for (int r = 0; r < repeats; ++r) {
      SweepRun run;
      run.value = v;
      run.seed = base.seed + static_cast<std::uint64_t>(r);
      result.runs.push_back(run);
    }
  }
  const std::vector<std::size_t> ks{1};
  parallel_for(result.runs.size(), [&](std::size_t i) {
    SweepRun& run = result.runs[i];
    try {
      TrainConfig cfg = apply_sweep_value(base, param, run.value, train.num_classes());
      cfg.seed = run.seed;
      const RunRecord rec = run_training(train, &eval, cfg, EvalOptions{ks, false});
      run.recall_at_1 = rec.final_report->recall_at.at(1);
      run.map_at_r = rec.final_report->map_at_r;
      run.r_precision = rec.final_report->r_precision;
      run.ok = std::isfinite(run.recall_at_1) && std::isfinite(run.map_at_r);
      if (!run.ok) run.error = "non-finite metrics";
    } catch (const std::exception& e) {
      run.ok = false;
      run.error = e.what();
    }
  });
  for (std::size_t v = 0; v < values.size(); ++v) {
    SweepRow row;
    row.value = values[v];
    std::vector<double> r1;
    std::vector<double> map;
    for (int r = 0; r < repeats; ++r) {
      const SweepRun& run = result.runs[v * static_cast<std::size_t>(repeats) + static_cast<std::size_t>(r)];
      if (!run.ok) {
        ++row.failed;
        continue;
      }
      r1.push_back(run.recall_at_1);
      map.push_back(run.map_at_r);
    }
    row.completed = r1.size();
    std::tie(row.mean_recall_at_1, row.ci95_recall_at_1) = mean_ci95(r1);
    std::tie(row.mean_map_at_r, row.ci95_map_at_r) = mean_ci95(map);
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace hpl::cli
