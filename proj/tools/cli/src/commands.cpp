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

#include "hpl/cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hpl/cli/experiment.hpp"
#include "hpl/errors.hpp"
#include "hpl/format.hpp"
#include "hpl/parallel.hpp"

namespace hpl::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainFlags {
  std::string data;
  std::string eval_data;
  std::string loss = "nca";
  std::string levels;
  int coarse = -1;
  double omega1 = 0.1;
  std::string omega;
  int epochs = 30;
  int warmup = 3;
  double lr = 1e-4;
  double proxy_lr_mult = 1.0;
  int batch = 32;
  std::uint64_t seed = 0;
  bool gt_hierarchy = false;
  double alpha = 32.0;
  double delta = 0.1;
  std::size_t embed_dim = 32;
  std::string hidden = "64";
  int update_period = 0;
  bool normalize_clusters = false;
  std::string ks = "1,2,4,8";
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--data", f.data, "Training dataset file")->required();
  cmd->add_option("--eval-data", f.eval_data, "Held-out dataset scored with the single-set protocol");
  cmd->add_option("--loss", f.loss, "Base proxy loss")->check(CLI::IsMember({"nca", "anchor"}));
  cmd->add_option("--coarse", f.coarse, "Coarse proxies |P1| (0 = single level)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--levels", f.levels, "Comma list of coarse level sizes, overrides --coarse (e.g. 16,4)");
  cmd->add_option("--omega1", f.omega1, "Loss weight of the first coarse level")->check(CLI::NonNegativeNumber);
  cmd->add_option("--omega", f.omega, "Comma list of all level weights, overrides --omega1");
  cmd->add_option("--epochs", f.epochs)->check(CLI::NonNegativeNumber);
  cmd->add_option("--warmup", f.warmup, "Base-loss-only epochs before the pyramid is built")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--lr", f.lr)->check(CLI::PositiveNumber);
  cmd->add_option("--proxy-lr-mult", f.proxy_lr_mult, "Proxy learning rate multiplier")->check(CLI::PositiveNumber);
  cmd->add_option("--batch", f.batch)->check(CLI::Range(2, 1 << 30));
  cmd->add_option("--seed", f.seed);
  cmd->add_flag("--gt-hierarchy", f.gt_hierarchy, "Use the dataset's class -> super-class map as a fixed hierarchy");
  cmd->add_option("--alpha", f.alpha, "Proxy Anchor scale")->check(CLI::PositiveNumber);
  cmd->add_option("--delta", f.delta, "Proxy Anchor margin")->check(CLI::NonNegativeNumber);
  cmd->add_option("--embed-dim", f.embed_dim)->check(CLI::PositiveNumber);
  cmd->add_option("--hidden", f.hidden, "Comma list of hidden layer widths (empty for linear)");
  cmd->add_option("--update-period", f.update_period, "Iterations between pyramid refreshes (0 = one epoch)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--normalize-clusters", f.normalize_clusters, "Unit-normalize proxies before clustering");
  cmd->add_option("--k", f.ks, "Comma list of Recall@K cutoffs");
}

std::vector<std::size_t> parse_sizes(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  try {
    for (long long v : parse_int_list(text, what)) {
      if (v < 0) throw UsageError(std::string(what) + " must be non-negative");
      out.push_back(static_cast<std::size_t>(v));
    }
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  return out;
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  auto ks = parse_sizes(text, "--k");
  if (ks.empty()) throw UsageError("--k needs at least one cutoff");
  for (std::size_t k : ks) {
    if (k == 0) throw UsageError("--k cutoffs must be positive");
  }
  return ks;
}

Dataset load_or_throw(const std::string& path) {
  try {
    return load_dataset(path);
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

TrainConfig build_config(const TrainFlags& f, const Dataset& train) {
  TrainConfig cfg;
  cfg.epochs = f.epochs;
  cfg.warmup_epochs = f.warmup;
  cfg.batch_size = f.batch;
  cfg.lr = f.lr;
  cfg.proxy_lr_multiplier = f.proxy_lr_mult;
  cfg.update_period = f.update_period;
  cfg.loss.kind = parse_loss_kind(f.loss);
  cfg.loss.alpha = f.alpha;
  cfg.loss.delta = f.delta;
  cfg.seed = f.seed;
  cfg.embed_dim = f.embed_dim;
  cfg.hidden_dims = parse_sizes(f.hidden, "--hidden");
  cfg.normalize_before_clustering = f.normalize_clusters;

  const std::size_t num_classes = train.num_classes();
  cfg.level_sizes = {num_classes};
  if (f.gt_hierarchy) {
    if (!train.gt_coarse) {
      throw std::runtime_error("--gt-hierarchy: dataset '" + f.data + "' has no '#coarse:' class hierarchy");
    }
    if (!f.levels.empty() || f.coarse > 0) {
      throw UsageError("--gt-hierarchy fixes the coarse level; do not combine it with --coarse/--levels");
    }
    cfg.level_sizes.push_back(train.num_super_classes());
    cfg.gt_hierarchy = train.gt_coarse;
  } else if (!f.levels.empty()) {
    for (std::size_t s : parse_sizes(f.levels, "--levels")) cfg.level_sizes.push_back(s);
  } else if (f.coarse > 0) {
    cfg.level_sizes.push_back(static_cast<std::size_t>(f.coarse));
  }

  if (!f.omega.empty()) {
    try {
      cfg.weights = parse_double_list(f.omega, "--omega");
    } catch (const ContractError& e) {
      throw UsageError(e.what());
    }
  } else {
    cfg.weights = {1.0};
    if (cfg.level_sizes.size() > 1) cfg.weights.push_back(f.omega1);
    for (std::size_t l = 2; l < cfg.level_sizes.size(); ++l) cfg.weights.push_back(f.omega1);
  }
  try {
    cfg.validate(num_classes);
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  if (static_cast<std::size_t>(cfg.batch_size) > train.size()) {
    throw UsageError("--batch " + std::to_string(cfg.batch_size) + " exceeds the dataset size " +
                     std::to_string(train.size()));
  }
  return cfg;
}

std::string config_line(const TrainConfig& cfg) {
  std::string line = "config";
  for (const auto& [k, v] : cfg.to_key_values()) line += "\t" + k + "=" + v;
  return line;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

nlohmann::json record_json(const RunRecord& rec) {
  nlohmann::json j;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : rec.config.to_key_values()) cfg[k] = v;
  j["config"] = cfg;
  j["seed"] = rec.config.seed;
  j["wall_seconds"] = rec.wall_seconds;
  j["epochs"] = nlohmann::json::array();
  for (const EpochMetrics& e : rec.epochs) {
    j["epochs"].push_back({{"epoch", e.epoch}, {"recall_at_1", e.recall_at_1}, {"map_at_r", e.map_at_r},
                           {"r_precision", e.r_precision}});
  }
  if (rec.final_report) {
    nlohmann::json recall = nlohmann::json::object();
    for (const auto& [k, v] : rec.final_report->recall_at) recall[std::to_string(k)] = v;
    j["final"] = {{"recall_at", recall},
                  {"r_precision", rec.final_report->r_precision},
                  {"map_at_r", rec.final_report->map_at_r},
                  {"num_queries", rec.final_report->num_queries}};
  }
  return j;
}

void write_log(const std::string& path, const std::vector<IterationLog>& log) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open log file '" + path + "'");
  out << "#epoch\titer\tlevel0_loss\ttotal_loss\n";
  for (const IterationLog& e : log) out << format_log_line(e) << '\n';
}

int cmd_generate(const SyntheticSpec& spec, const std::string& out_path, std::ostream& out) {
  try {
    spec.validate();
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  const Dataset data = generate_synthetic(spec);
  save_dataset(out_path, data);
  out << "generated\tN=" << data.size() << "\tC=" << data.num_classes() << "\tsuper=" << data.num_super_classes()
      << "\tdim=" << data.input_dim() << "\tout=" << out_path << '\n';
  return kExitOk;
}

struct SplitFlags {
  std::string data;
  double fraction = 0.5;
  std::uint64_t seed = 0;
  std::string out_train;
  std::string out_test;
};

int cmd_split(const SplitFlags& f, std::ostream& out) {
  const Dataset data = load_or_throw(f.data);
  Rng rng(f.seed);
  std::pair<Dataset, Dataset> sides;
  try {
    sides = split_classes(data, f.fraction, rng);
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  save_dataset(f.out_train, sides.first);
  save_dataset(f.out_test, sides.second);
  out << "split\ttrain_N=" << sides.first.size() << "\ttrain_C=" << sides.first.num_classes()
      << "\ttest_N=" << sides.second.size() << "\ttest_C=" << sides.second.num_classes() << '\n';
  return kExitOk;
}

struct TrainOutputs {
  std::string checkpoint = "hpl.ckpt";
  std::string log;
  std::string record;
  std::string resume;
  /// Set when --epochs was passed explicitly; extends a resumed run.
  std::optional<int> resume_epochs;
};

int cmd_train(const TrainFlags& f, const TrainOutputs& o, std::ostream& out, std::ostream& err) {
  const Dataset train = load_or_throw(f.data);
  std::optional<Dataset> eval;
  if (!f.eval_data.empty()) eval = load_or_throw(f.eval_data);
  const std::vector<std::size_t> ks = parse_ks(f.ks);

  RunRecord rec;
  Checkpoint final_state;
  if (!o.resume.empty()) {
    Checkpoint start = load_checkpoint(o.resume);
    if (o.resume_epochs) start.config.epochs = *o.resume_epochs;
    const auto t0 = std::chrono::steady_clock::now();
    Trainer trainer = Trainer::resume(train, start);
    rec.config = trainer.config();
    trainer.run([&](const Trainer& t) {
      if (!eval) return;
      const RetrievalReport r = evaluate_same_set(t.network(), *eval, std::vector<std::size_t>{1});
      rec.epochs.push_back(EpochMetrics{t.epoch(), r.recall_at.at(1), r.map_at_r, r.r_precision});
    });
    if (eval) rec.final_report = evaluate_same_set(trainer.network(), *eval, ks);
    rec.log = trainer.log();
    final_state = trainer.checkpoint();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } else {
    const TrainConfig cfg = build_config(f, train);
    if (cfg.level_sizes.size() == 1) err << "note: single-level run (pass --coarse N for a proxy pyramid)\n";
    rec = run_training(train, eval ? &*eval : nullptr, cfg, EvalOptions{ks, true}, &final_state);
  }

  out << config_line(rec.config) << '\n';
  for (const EpochMetrics& e : rec.epochs) {
    out << "epoch\t" << e.epoch << "\trecall@1=" << format_double(e.recall_at_1)
        << "\tmap@r=" << format_double(e.map_at_r) << "\trp=" << format_double(e.r_precision) << '\n';
  }
  save_checkpoint(o.checkpoint, final_state);
  const std::string log_path = o.log.empty() ? o.checkpoint + ".log" : o.log;
  write_log(log_path, rec.log);
  out << "trained\tepochs=" << final_state.epoch << "\titerations=" << final_state.iteration
      << "\tfinal_loss=" << (rec.log.empty() ? std::string("nan") : format_double(rec.log.back().total_loss))
      << "\tcheckpoint=" << o.checkpoint << "\tlog=" << log_path << '\n';
  if (rec.final_report) {
    out << format_report_line(*rec.final_report) << '\n' << format_report_table(*rec.final_report);
  }
  if (!o.record.empty()) {
    std::ofstream rf(o.record, std::ios::trunc);
    if (!rf) throw std::runtime_error("cannot open record file '" + o.record + "'");
    rf << record_json(rec).dump(2) << '\n';
  }
  err << "wall time " << fmt(rec.wall_seconds) << " s\n";
  return kExitOk;
}

struct EvalFlags {
  std::string checkpoint;
  std::string query;
  std::string gallery;
  bool same_set = false;
  std::string ks = "1,2,4,8";
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  if (f.same_set == !f.gallery.empty()) throw UsageError("pass exactly one of --gallery or --same-set");
  const std::vector<std::size_t> ks = parse_ks(f.ks);
  const Checkpoint ckpt = load_checkpoint(f.checkpoint);
  const Dataset query = load_or_throw(f.query);
  auto check_dims = [&](const Dataset& d, const std::string& path) {
    if (d.size() > 0 && d.input_dim() != ckpt.network.input_dim()) {
      throw std::runtime_error("'" + path + "' has " + std::to_string(d.input_dim()) +
                               " features but the checkpoint network expects " +
                               std::to_string(ckpt.network.input_dim()));
    }
  };
  check_dims(query, f.query);
  RetrievalReport report;
  if (f.same_set) {
    report = evaluate_same_set(ckpt.network, query, ks);
  } else {
    const Dataset gallery = load_or_throw(f.gallery);
    check_dims(gallery, f.gallery);
    report = evaluate(embed_dataset(ckpt.network, query), query.labels, embed_dataset(ckpt.network, gallery),
                      gallery.labels, ks, false);
  }
  out << format_report_line(report) << '\n' << format_report_table(report);
  return kExitOk;
}

struct SweepFlags {
  std::string param = "omega1";
  std::string values;
  int repeats = 1;
};

int cmd_sweep(const TrainFlags& f, const SweepFlags& s, std::ostream& out) {
  if (f.eval_data.empty()) throw UsageError("sweep needs --eval-data");
  const Dataset train = load_or_throw(f.data);
  const Dataset eval = load_or_throw(f.eval_data);
  std::vector<double> values;
  try {
    values = parse_double_list(s.values, "--values");
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
  if (values.empty()) throw UsageError("--values needs at least one value");
  const SweepParam param = s.param == "coarse" ? SweepParam::kCoarse : SweepParam::kOmega1;
  const TrainConfig base = build_config(f, train);
  if (param == SweepParam::kOmega1 && base.level_sizes.size() < 2) {
    throw UsageError("an omega1 sweep needs a coarse level (--coarse N)");
  }
  for (double v : values) {
    try {
      apply_sweep_value(base, param, v, train.num_classes()).validate(train.num_classes());
    } catch (const ContractError& e) {
      throw UsageError("--values " + format_double(v) + ": " + e.what());
    }
  }
  const SweepResult result = run_sweep(train, eval, base, param, values, s.repeats);
  out << "#run\t" << s.param << "\tseed\trecall@1\tmap@r\trp\tstatus\n";
  for (const SweepRun& r : result.runs) {
    out << "run\t" << format_double(r.value) << '\t' << r.seed << '\t' << format_double(r.recall_at_1) << '\t'
        << format_double(r.map_at_r) << '\t' << format_double(r.r_precision) << '\t'
        << (r.ok ? std::string("ok") : "error: " + r.error) << '\n';
  }
  out << "#summary\t" << s.param << "\truns_ok\truns_failed\tmean_recall@1\tci95_recall@1\tmean_map@r\tci95_map@r\n";
  for (const SweepRow& row : result.rows) {
    out << "summary\t" << format_double(row.value) << '\t' << row.completed << '\t' << row.failed << '\t'
        << format_double(row.mean_recall_at_1) << '\t' << format_double(row.ci95_recall_at_1) << '\t'
        << format_double(row.mean_map_at_r) << '\t' << format_double(row.ci95_map_at_r) << '\n';
  }
  return kExitOk;
}

void apply_thread_env() {
  const char* env = std::getenv("HPL_THREADS");
  if (!env || !*env) return;
  try {
    const long long n = parse_int(env, "HPL_THREADS");
    if (n < 0) throw UsageError("HPL_THREADS must be >= 0");
    set_max_threads(static_cast<std::size_t>(n));
  } catch (const ContractError& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

std::string format_report_line(const RetrievalReport& report) {
  std::string line = "metrics\tqueries=" + std::to_string(report.num_queries);
  for (const auto& [k, v] : report.recall_at) line += "\trecall@" + std::to_string(k) + "=" + format_double(v);
  line += "\trp=" + format_double(report.r_precision);
  line += "\tmap@r=" + format_double(report.map_at_r);
  return line;
}

std::string format_report_table(const RetrievalReport& report) {
  std::ostringstream os;
  os << "# metric        value\n";
  for (const auto& [k, v] : report.recall_at) {
    os << "# Recall@" << std::left << std::setw(6) << k << "  " << fmt(v) << '\n';
  }
  os << "# R-Precision     " << fmt(report.r_precision) << '\n';
  os << "# MAP@R           " << fmt(report.map_at_r) << '\n';
  os << "# queries         " << report.num_queries << '\n';
  return os.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical proxy-based metric learning", "hpl"};
  app.require_subcommand(1);

  SyntheticSpec spec;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "Write a synthetic two-level hierarchical dataset");
  gen->add_option("--num-super", spec.num_super, "Super-classes")->check(CLI::PositiveNumber);
  gen->add_option("--classes-per-super", spec.classes_per_super)->check(CLI::PositiveNumber);
  gen->add_option("--samples-per-class", spec.samples_per_class)->check(CLI::PositiveNumber);
  gen->add_option("--dim", spec.input_dim, "Feature dimension")->check(CLI::PositiveNumber);
  gen->add_option("--super-spread", spec.super_spread, "Std-dev of super-class centers")->check(CLI::PositiveNumber);
  gen->add_option("--class-spread", spec.class_spread, "Std-dev of class centers around their super-class")
      ->check(CLI::PositiveNumber);
  gen->add_option("--noise", spec.noise, "Std-dev of samples around their class center")->check(CLI::PositiveNumber);
  gen->add_option("--seed", spec.seed);
  gen->add_option("--out", gen_out, "Output dataset file")->required();

  SplitFlags split_flags;
  auto* split = app.add_subcommand("split", "Class-disjoint train/test split of a dataset file");
  split->add_option("--data", split_flags.data)->required();
  split->add_option("--fraction", split_flags.fraction, "Fraction of classes kept for training");
  split->add_option("--seed", split_flags.seed);
  split->add_option("--out-train", split_flags.out_train)->required();
  split->add_option("--out-test", split_flags.out_test)->required();

  TrainFlags train_flags;
  TrainOutputs train_outputs;
  auto* train = app.add_subcommand("train", "Train an embedding network with a (hierarchical) proxy loss");
  add_train_flags(train, train_flags);
  train->add_option("--out-checkpoint", train_outputs.checkpoint, "Checkpoint written at the end of training");
  train->add_option("--log", train_outputs.log, "Per-iteration loss log (default: <checkpoint>.log)");
  train->add_option("--record", train_outputs.record, "Write the run record as JSON");
  train->add_option("--resume", train_outputs.resume, "Continue training from a checkpoint");

  EvalFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Retrieval metrics of a trained checkpoint");
  eval->add_option("--checkpoint", eval_flags.checkpoint)->required();
  eval->add_option("--query", eval_flags.query)->required();
  eval->add_option("--gallery", eval_flags.gallery);
  eval->add_flag("--same-set", eval_flags.same_set, "Query against the query set itself, excluding self-matches");
  eval->add_option("--k", eval_flags.ks, "Comma list of Recall@K cutoffs");

  TrainFlags sweep_train_flags;
  SweepFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Train+eval over a list of hyperparameter values and seeds");
  add_train_flags(sweep, sweep_train_flags);
  sweep->add_option("--param", sweep_flags.param)->check(CLI::IsMember({"omega1", "coarse"}));
  sweep->add_option("--values", sweep_flags.values, "Comma list of values")->required();
  sweep->add_option("--repeats", sweep_flags.repeats, "Seeds per value")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    apply_thread_env();
    if (gen->parsed()) return cmd_generate(spec, gen_out, out);
    if (split->parsed()) return cmd_split(split_flags, out);
    if (train->parsed()) {
      if (train->count("--epochs") > 0) train_outputs.resume_epochs = train_flags.epochs;
      return cmd_train(train_flags, train_outputs, out, err);
    }
    if (eval->parsed()) return cmd_eval(eval_flags, out);
    if (sweep->parsed()) return cmd_sweep(sweep_train_flags, sweep_flags, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace hpl::cli
