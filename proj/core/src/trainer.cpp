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

#include "hpl/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "hpl/errors.hpp"
#include "hpl/format.hpp"
#include "hpl/vector_math.hpp"

namespace hpl {

namespace {

enum Stream : std::uint64_t { kNetInit = 1, kProxyInit = 2, kSampler = 3, kCluster = 4 };

std::vector<std::size_t> network_dims(const TrainConfig& cfg, std::size_t input_dim) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), cfg.hidden_dims.begin(), cfg.hidden_dims.end());
  dims.push_back(cfg.embed_dim);
  return dims;
}

// A training set the trainer cannot use is a caller contract violation.
void validate_training_set(const Dataset& train) {
  try {
    train.validate();
  } catch (const ValidationError& e) {
    throw ContractError(std::string("Trainer: ") + e.what());
  }
}

Matrix random_unit_proxies(std::size_t count, std::size_t dim, Rng rng) {
  Matrix proxies(count, dim);
  for (std::size_t c = 0; c < count; ++c) {
    auto row = proxies.row(c);
    double sq = 0.0;
    do {
      sq = 0.0;
      for (double& v : row) {
        v = rng.normal();
        sq += v * v;
      }
    } while (sq == 0.0);
    const double n = std::sqrt(sq);
    for (double& v : row) v /= n;
  }
  return proxies;
}

}  // namespace

void TrainConfig::validate(std::size_t num_classes) const {
  if (epochs < 0 || warmup_epochs < 0 || warmup_epochs > epochs) {
    throw ContractError("TrainConfig: need 0 <= warmup_epochs <= epochs");
  }
  if (batch_size < 2) throw ContractError("TrainConfig: batch_size must be >= 2");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ContractError("TrainConfig: lr must be > 0");
  if (!(proxy_lr_multiplier > 0.0) || !std::isfinite(proxy_lr_multiplier)) {
    throw ContractError("TrainConfig: proxy_lr_multiplier must be > 0");
  }
  if (update_period < 0) throw ContractError("TrainConfig: update_period must be >= 0");
  if (embed_dim == 0) throw ContractError("TrainConfig: embed_dim must be positive");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw ContractError("TrainConfig: hidden layer widths must be positive");
  }
  if (kmeans_max_iters < 1) throw ContractError("TrainConfig: kmeans_max_iters must be >= 1");
  loss.validate();
  if (level_sizes.empty() || level_sizes[0] != num_classes) {
    throw ContractError("TrainConfig: level_sizes[0] must equal the class count (" +
                        std::to_string(num_classes) + ")");
  }
  for (std::size_t l = 1; l < level_sizes.size(); ++l) {
    if (level_sizes[l] == 0 || level_sizes[l] > level_sizes[l - 1]) {
      throw ContractError("TrainConfig: level sizes must be positive and non-increasing");
    }
  }
  if (loss.kind == LossKind::kProxyNca) {
    for (std::size_t size : level_sizes) {
      if (size < 2) throw ContractError("TrainConfig: Proxy-NCA needs at least 2 proxies per level");
    }
  }
  if (weights.size() != level_sizes.size()) {
    throw ContractError("TrainConfig: need one loss weight per pyramid level");
  }
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ContractError("TrainConfig: weights must be finite and >= 0");
  }
  if (!(weights[0] > 0.0)) throw ContractError("TrainConfig: the fine-level weight must be > 0");
  if (gt_hierarchy) {
    if (level_sizes.size() != 2) throw ContractError("TrainConfig: a fixed hierarchy needs exactly two levels");
    if (gt_hierarchy->size() != num_classes) {
      throw ContractError("TrainConfig: the fixed hierarchy must map every class");
    }
    const int supers = gt_hierarchy->empty() ? 0 : *std::max_element(gt_hierarchy->begin(), gt_hierarchy->end()) + 1;
    if (static_cast<std::size_t>(supers) != level_sizes[1]) {
      throw ContractError("TrainConfig: coarse level size must equal the number of super-classes (" +
                          std::to_string(supers) + ")");
    }
  }
}

std::vector<std::pair<std::string, std::string>> TrainConfig::to_key_values() const {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("epochs", std::to_string(epochs));
  kv.emplace_back("warmup_epochs", std::to_string(warmup_epochs));
  kv.emplace_back("batch_size", std::to_string(batch_size));
  kv.emplace_back("lr", format_double(lr));
  kv.emplace_back("proxy_lr_multiplier", format_double(proxy_lr_multiplier));
  kv.emplace_back("update_period", std::to_string(update_period));
  kv.emplace_back("level_sizes", join<std::size_t>(level_sizes));
  kv.emplace_back("weights", join<double>(weights));
  kv.emplace_back("loss", std::string(to_string(loss.kind)));
  kv.emplace_back("alpha", format_double(loss.alpha));
  kv.emplace_back("delta", format_double(loss.delta));
  kv.emplace_back("seed", std::to_string(seed));
  kv.emplace_back("hidden_dims", join<std::size_t>(hidden_dims));
  kv.emplace_back("embed_dim", std::to_string(embed_dim));
  kv.emplace_back("gt_hierarchy", gt_hierarchy ? "[" + join<int>(*gt_hierarchy) + "]" : "none");
  kv.emplace_back("normalize_before_clustering", normalize_before_clustering ? "1" : "0");
  kv.emplace_back("kmeans_max_iters", std::to_string(kmeans_max_iters));
  return kv;
}

TrainConfig parse_config(const std::map<std::string, std::string>& kv) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ContractError("config: missing key '" + key + "'");
    return it->second;
  };
  auto sizes = [](const std::string& text, const char* what) {
    std::vector<std::size_t> out;
    for (long long v : parse_int_list(text, what)) {
      if (v < 0) throw ContractError(std::string("config: negative ") + what);
      out.push_back(static_cast<std::size_t>(v));
    }
    return out;
  };
  TrainConfig cfg;
  cfg.epochs = static_cast<int>(parse_int(get("epochs"), "epochs"));
  cfg.warmup_epochs = static_cast<int>(parse_int(get("warmup_epochs"), "warmup_epochs"));
  cfg.batch_size = static_cast<int>(parse_int(get("batch_size"), "batch_size"));
  cfg.lr = parse_double(get("lr"), "lr");
  cfg.proxy_lr_multiplier = parse_double(get("proxy_lr_multiplier"), "proxy_lr_multiplier");
  cfg.update_period = static_cast<int>(parse_int(get("update_period"), "update_period"));
  cfg.level_sizes = sizes(get("level_sizes"), "level_sizes");
  cfg.weights = parse_double_list(get("weights"), "weights");
  cfg.loss.kind = parse_loss_kind(get("loss"));
  cfg.loss.alpha = parse_double(get("alpha"), "alpha");
  cfg.loss.delta = parse_double(get("delta"), "delta");
  {
    const std::string& s = get("seed");
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ContractError("config: invalid seed");
    cfg.seed = seed;
  }
  cfg.hidden_dims = sizes(get("hidden_dims"), "hidden_dims");
  cfg.embed_dim = static_cast<std::size_t>(parse_int(get("embed_dim"), "embed_dim"));
  const std::string& gt = get("gt_hierarchy");
  if (gt != "none") {
    if (gt.size() < 2 || gt.front() != '[' || gt.back() != ']') {
      throw ContractError("config: invalid gt_hierarchy");
    }
    std::vector<int> map;
    for (long long v : parse_int_list(std::string_view(gt).substr(1, gt.size() - 2), "gt_hierarchy")) {
      map.push_back(static_cast<int>(v));
    }
    cfg.gt_hierarchy = std::move(map);
  }
  cfg.normalize_before_clustering = get("normalize_before_clustering") == "1";
  cfg.kmeans_max_iters = static_cast<int>(parse_int(get("kmeans_max_iters"), "kmeans_max_iters"));
  return cfg;
}

BatchSampler::BatchSampler(std::size_t dataset_size, std::size_t batch_size, Rng rng)
    : dataset_size_(dataset_size), batch_size_(batch_size), rng_(rng) {
  if (dataset_size == 0) throw ContractError("BatchSampler: empty dataset");
  if (batch_size == 0 || batch_size > dataset_size) {
    throw ContractError("BatchSampler: batch size " + std::to_string(batch_size) +
                        " exceeds dataset size " + std::to_string(dataset_size));
  }
}

Batch BatchSampler::next(const Dataset& dataset) {
  if (dataset.size() != dataset_size_) throw ContractError("BatchSampler: dataset size changed");
  if (cursor_ == 0) {
    order_.resize(dataset_size_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    rng_.shuffle(std::span<std::size_t>(order_));
  }
  const std::size_t end = std::min(dataset_size_, cursor_ + batch_size_);
  Batch batch;
  batch.indices.assign(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                       order_.begin() + static_cast<std::ptrdiff_t>(end));
  batch.inputs = dataset.features.select_rows(batch.indices);
  batch.labels.reserve(batch.indices.size());
  for (std::size_t i : batch.indices) batch.labels.push_back(dataset.labels[i]);
  cursor_ = end == dataset_size_ ? 0 : end;
  return batch;
}

void BatchSampler::restore(Rng rng, std::vector<std::size_t> order, std::size_t cursor) {
  if (cursor >= dataset_size_ || (cursor != 0 && order.size() != dataset_size_)) {
    throw ContractError("BatchSampler::restore: inconsistent sampler state");
  }
  rng_ = rng;
  order_ = std::move(order);
  cursor_ = cursor;
}

std::string format_log_line(const IterationLog& e) {
  return std::to_string(e.epoch) + '\t' + std::to_string(e.iteration) + '\t' +
         format_double(e.level0_loss) + '\t' + format_double(e.total_loss);
}

Trainer::Trainer(const Dataset& train, TrainConfig cfg)
    : data_(&train),
      cfg_(std::move(cfg)),
      net_(std::vector<std::size_t>{1, 1}),
      pyramid_(Matrix(1, 1, 1.0)),
      sampler_(train.size(), static_cast<std::size_t>(std::max(cfg_.batch_size, 1)),
               Rng(cfg_.seed).derive(kSampler)),
      cluster_rng_(Rng(cfg_.seed).derive(kCluster)) {
  validate_training_set(train);
  if (train.size() == 0) throw ContractError("Trainer: empty dataset");
  cfg_.validate(train.num_classes());
  const Rng root(cfg_.seed);
  Rng net_rng = root.derive(kNetInit);
  net_ = Mlp::glorot(network_dims(cfg_, train.input_dim()), net_rng);
  pyramid_ = ProxyPyramid(random_unit_proxies(train.num_classes(), cfg_.embed_dim, root.derive(kProxyInit)),
                          cfg_.weights[0]);
  net_opt_ = AdamState(net_.parameters().size(), cfg_.lr);
  proxy_opt_ = AdamState(pyramid_.level(0).size(), cfg_.lr * cfg_.proxy_lr_multiplier);
  update_period_ = cfg_.update_period > 0 ? cfg_.update_period
                                          : static_cast<std::int64_t>(sampler_.iterations_per_epoch());
}

Trainer::Trainer(const Dataset& train, const Checkpoint& ckpt, ResumeTag)
    : data_(&train),
      cfg_(ckpt.config),
      net_(ckpt.network),
      pyramid_(ckpt.pyramid),
      pyramid_built_(ckpt.pyramid_built),
      net_opt_(ckpt.net_opt),
      proxy_opt_(ckpt.proxy_opt),
      sampler_(train.size(), static_cast<std::size_t>(std::max(cfg_.batch_size, 1)), ckpt.sampler_rng),
      cluster_rng_(ckpt.cluster_rng),
      epoch_(ckpt.epoch),
      iteration_(ckpt.iteration),
      post_warmup_iteration_(ckpt.post_warmup_iteration) {
  validate_training_set(train);
  cfg_.validate(train.num_classes());
  if (net_.input_dim() != train.input_dim() || pyramid_.level_size(0) != train.num_classes()) {
    throw ContractError("Trainer::resume: checkpoint does not match the dataset");
  }
  if (net_opt_.m.size() != net_.parameters().size() || proxy_opt_.m.size() != pyramid_.level(0).size()) {
    throw ContractError("Trainer::resume: optimizer state does not match the parameters");
  }
  sampler_.restore(ckpt.sampler_rng, ckpt.sampler_order, ckpt.sampler_cursor);
  update_period_ = cfg_.update_period > 0 ? cfg_.update_period
                                          : static_cast<std::int64_t>(sampler_.iterations_per_epoch());
}

Trainer Trainer::resume(const Dataset& train, const Checkpoint& checkpoint) {
  return Trainer(train, checkpoint, ResumeTag{});
}

void Trainer::build_pyramid() {
  Matrix fine = pyramid_.level(0);
  pyramid_ = init_pyramid(fine, cfg_.level_sizes, cfg_.weights, cluster_rng_,
                          cfg_.normalize_before_clustering, cfg_.kmeans_max_iters);
  if (cfg_.gt_hierarchy) pyramid_.set_fixed_hierarchy(*cfg_.gt_hierarchy);
  pyramid_built_ = true;
}

IterationLog Trainer::step() {
  if (finished()) throw ContractError("Trainer::step: training already finished");
  if (!pyramid_built_ && epoch_ >= cfg_.warmup_epochs) build_pyramid();

  const Batch batch = sampler_.next(*data_);
  ForwardResult fwd = forward(net_, batch.inputs);

  IterationLog entry;
  entry.epoch = epoch_;
  entry.iteration = iteration_;
  LossOutput loss;
  if (pyramid_built_) {
    const HierarchyLabels labels = pyramid_.propagate_labels(batch.labels);
    loss = hpl_loss(fwd.embeddings, labels.labels, pyramid_.levels(), pyramid_.weights(), cfg_.loss);
    entry.level0_loss = loss.level_values.front();
  } else {
    loss = base_loss(fwd.embeddings, batch.labels, pyramid_.level(0), cfg_.loss);
    entry.level0_loss = loss.value;
  }
  entry.total_loss = loss.value;
  if (!std::isfinite(loss.value)) {
    throw TrainingError("non-finite loss at epoch " + std::to_string(epoch_) + ", iteration " +
                        std::to_string(iteration_) + " (level-0 loss " +
                        format_double(entry.level0_loss) + ")");
  }

  const GradBuffer grads = backward(net_, fwd.tape, loss.d_embeddings);
  adam_step(net_.mutable_parameters(), grads.values, net_opt_);
  adam_step(pyramid_.fine_proxies().data(), loss.d_proxies.data(), proxy_opt_);
  last_proxy_grad_ = std::move(loss.d_proxies);

  if (pyramid_built_) {
    ++post_warmup_iteration_;
    if (pyramid_.num_levels() > 1 && post_warmup_iteration_ % update_period_ == update_period_ - 1) {
      pyramid_.update_assignments();
      pyramid_.update_centroids();
    }
  }

  ++iteration_;
  if (sampler_.at_epoch_start()) ++epoch_;
  log_.push_back(entry);
  return entry;
}

void Trainer::run(const std::function<void(const Trainer&)>& on_epoch_end) {
  while (!finished()) {
    const int before = epoch_;
    step();
    if (epoch_ != before && on_epoch_end) on_epoch_end(*this);
  }
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.config = cfg_;
  c.network = net_;
  c.pyramid = pyramid_;
  c.pyramid_built = pyramid_built_;
  c.net_opt = net_opt_;
  c.proxy_opt = proxy_opt_;
  c.sampler_rng = sampler_.rng();
  c.sampler_order = sampler_.order();
  c.sampler_cursor = sampler_.cursor();
  c.cluster_rng = cluster_rng_;
  c.epoch = epoch_;
  c.iteration = iteration_;
  c.post_warmup_iteration = post_warmup_iteration_;
  return c;
}

TrainResult train(const Dataset& dataset, const TrainConfig& cfg,
                  const std::function<void(const Trainer&)>& on_epoch_end) {
  Trainer trainer(dataset, cfg);
  trainer.run(on_epoch_end);
  return TrainResult{trainer.network(), trainer.pyramid(), trainer.log()};
}

}  // namespace hpl
