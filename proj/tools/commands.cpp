// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "mfn/data.hpp"
#include "mfn/error.hpp"
#include "mfn/experiment.hpp"
#include "mfn/metrics.hpp"

namespace mfn::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// RunConfig <-> JSON

Json to_json(const RunConfig& rc) {
  Json j;
  j["seed"] = rc.seed;
  j["threads"] = rc.threads;
  j["task"] = rc.task;
  j["variant"] = rc.variant;
  j["hidden_dim"] = rc.hidden_dim;
  j["memory_dim"] = rc.memory_dim;
  if (rc.model) j["model"] = mfn::to_json(*rc.model);
  j["train"] = mfn::to_json(rc.train);
  j["synth"] = mfn::to_json(rc.synth);
  j["ratios"] = rc.ratios;
  return j;
}

RunConfig run_config_from_json(const Json& j, RunConfig rc) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  static const char* const kKeys[] = {"seed",  "threads", "task",  "variant", "hidden_dim",
                                      "memory_dim", "model", "train", "synth",   "ratios"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw ConfigError("run config: unknown key '" + key + "'");
    }
  }
  try {
    if (j.contains("seed")) rc.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads")) rc.threads = j.at("threads").get<std::size_t>();
    if (j.contains("task")) rc.task = j.at("task").get<std::string>();
    if (j.contains("variant")) rc.variant = j.at("variant").get<std::string>();
    if (j.contains("hidden_dim")) rc.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    if (j.contains("memory_dim")) rc.memory_dim = j.at("memory_dim").get<std::size_t>();
    if (j.contains("ratios")) rc.ratios = j.at("ratios").get<std::array<double, 3>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  if (j.contains("model")) rc.model = mfn_config_from_json(j.at("model"));
  if (j.contains("train")) rc.train = train_config_from_json(j.at("train"), rc.train);
  if (j.contains("synth")) rc.synth = synth_config_from_json(j.at("synth"), rc.synth);
  return rc;
}

namespace {

// ---------------------------------------------------------------------------
// Flag plumbing

/// Command-line values that override the config file when given.
struct Overrides {
  std::string config_path;
  std::vector<std::function<void(RunConfig&)>> apply;
};

template <typename T, typename Setter>
void add_override(CLI::App* app, Overrides& o, const std::string& name, const std::string& help, Setter set) {
  auto value = std::make_shared<T>();
  CLI::Option* opt = app->add_option(name, *value, help);
  o.apply.push_back([opt, value, set](RunConfig& rc) {
    if (opt->count() > 0) set(rc, *value);
  });
}

void add_common_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "JSON run config (flags override it)")->check(CLI::ExistingFile);
  add_override<std::uint64_t>(app, o, "--seed", "Root seed", [](RunConfig& rc, std::uint64_t v) { rc.seed = v; });
  add_override<std::size_t>(app, o, "--threads", "Threads for evaluation",
                            [](RunConfig& rc, std::size_t v) { rc.threads = v; });
}

void add_model_flags(CLI::App* app, Overrides& o) {
  add_override<std::string>(app, o, "--task", "auto, regression or classification:<k>",
                            [](RunConfig& rc, const std::string& v) { rc.task = v; });
  add_override<std::string>(app, o, "--variant", "full, no_delta, no_mem or single_view:<view>",
                            [](RunConfig& rc, const std::string& v) { rc.variant = v; });
  add_override<std::size_t>(app, o, "--hidden", "LSTM memory size per view",
                            [](RunConfig& rc, std::size_t v) { rc.hidden_dim = v; });
  add_override<std::size_t>(app, o, "--memory", "Size of the multi-view gated memory",
                            [](RunConfig& rc, std::size_t v) { rc.memory_dim = v; });
}

void add_train_flags(CLI::App* app, Overrides& o) {
  add_override<std::size_t>(app, o, "--epochs", "Maximum epochs",
                            [](RunConfig& rc, std::size_t v) { rc.train.max_epochs = v; });
  add_override<double>(app, o, "--lr", "Learning rate", [](RunConfig& rc, double v) { rc.train.learning_rate = v; });
  add_override<std::size_t>(app, o, "--batch", "Sequences per update",
                            [](RunConfig& rc, std::size_t v) { rc.train.batch_size = v; });
  add_override<std::size_t>(app, o, "--patience", "Early-stopping patience",
                            [](RunConfig& rc, std::size_t v) { rc.train.patience = v; });
  add_override<double>(app, o, "--clip", "Gradient clip norm (0 disables)",
                       [](RunConfig& rc, double v) { rc.train.clip_norm = v; });
  add_override<std::string>(app, o, "--optimizer", "adam or sgd", [](RunConfig& rc, const std::string& v) {
    rc.train = train_config_from_json(Json{{"optimizer", v}}, rc.train);
  });
}

void add_split_flags(CLI::App* app, Overrides& o) {
  auto value = std::make_shared<std::vector<double>>();
  CLI::Option* opt = app->add_option("--ratios", *value, "Train, valid and test fractions")->expected(3);
  o.apply.push_back([opt, value](RunConfig& rc) {
    if (opt->count() > 0) rc.ratios = {(*value)[0], (*value)[1], (*value)[2]};
  });
}

RunConfig resolve(const Overrides& o) {
  RunConfig rc;
  if (!o.config_path.empty()) rc = run_config_from_json(read_json_file(o.config_path));
  for (const auto& f : o.apply) f(rc);
  rc.train.seed = rc.seed;
  rc.train.threads = rc.threads;
  rc.synth.seed = rc.seed;
  if (rc.model && rc.variant != "full") rc.model = rc.model->with_variant(Variant::parse(rc.variant));
  rc.train.validate();
  if (rc.threads == 0) throw ConfigError("threads must be >= 1");
  return rc;
}

/// Completes the model config from the dataset when the run config has none.
void resolve_model(RunConfig& rc, const Dataset& data) {
  if (!rc.model) {
    rc.model = config_for(data, rc.hidden_dim, rc.memory_dim, parse_task(rc.task, data), Variant::parse(rc.variant));
  }
  rc.model->validate();
}

Json envelope(const std::string& command, const RunConfig& rc, Json inputs) {
  Json j;
  j["command"] = command;
  j["seed"] = rc.seed;
  j["run_config"] = to_json(rc);
  j["inputs"] = std::move(inputs);
  return j;
}

void emit(const Json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json_file(j, out);
  }
}

DatasetSplit load_or_make_split(const std::string& path, const Dataset& data, const RunConfig& rc) {
  if (path.empty()) return split_by_group(data, rc.ratios, rc.seed);
  const Json j = read_json_file(path);
  return dataset_split_from_json(j.contains("split") ? j.at("split") : j);
}

SplitPart parse_part(const std::string& name) {
  if (name == "train") return SplitPart::kTrain;
  if (name == "valid") return SplitPart::kValid;
  if (name == "test") return SplitPart::kTest;
  throw ConfigError("unknown split part '" + name + "' (expected train, valid, test or all)");
}

// ---------------------------------------------------------------------------
// Commands

struct Paths {
  std::string data, out, split, checkpoint, history, latents, part = "test";
};

int cmd_synth(const Overrides& o, const Paths& p) {
  RunConfig rc = resolve(o);
  rc.synth.validate();
  const SynthDataset s = gen_crossview_task(rc.synth);
  save_dataset(s.data, p.out);
  const std::string latents = p.latents.empty() ? p.out + ".latents.jsonl" : p.latents;
  std::ofstream lat(latents);
  if (!lat) throw Error("cannot write '" + latents + "'");
  write_latents(s.latents, lat);
  Json manifest = envelope("synth", rc, {{"out", p.out}, {"latents", latents}});
  manifest["samples"] = s.data.size();
  write_json_file(manifest, p.out + ".run.json");
  std::cout << manifest.dump(2) << "\n";
  return kExitOk;
}

int cmd_split(const Overrides& o, const Paths& p) {
  const RunConfig rc = resolve(o);
  const Dataset data = load_dataset(p.data);
  const DatasetSplit split = split_by_group(data, rc.ratios, rc.seed);
  Json j = envelope("split", rc, {{"data", p.data}});
  j["split"] = to_json(split);
  emit(j, p.out);
  return kExitOk;
}

int cmd_train(const Overrides& o, const Paths& p) {
  RunConfig rc = resolve(o);
  const Dataset data = load_dataset(p.data);
  resolve_model(rc, data);
  const DatasetSplit split = load_or_make_split(p.split, data, rc);
  const Dataset train_set = select(data, split.train);
  const Dataset valid_set = select(data, split.valid);

  const TrainResult result = train(*rc.model, init_params(*rc.model, rc.seed), train_set, valid_set, rc.train);
  const Json inputs = {{"data", p.data}, {"split", p.split}};
  Json run_config = envelope("train", rc, inputs);
  save_checkpoint({*rc.model, result.best_params, rc.seed, run_config}, p.out);

  Json history = envelope("train", rc, inputs);
  history["history"] = to_json(result.history);
  const std::string history_path = p.history.empty() ? p.out + ".history.json" : p.history;
  write_json_file(history, history_path);

  const auto& best = result.history.epochs[result.history.best_epoch - 1];
  std::cout << Json{{"checkpoint", p.out},
                    {"history", history_path},
                    {"epochs", result.history.epochs.size()},
                    {"best_epoch", result.history.best_epoch},
                    {"best_valid_loss", best.valid_loss},
                    {result.history.metric_name, best.valid_metric},
                    {"parameters", result.best_params.parameter_count()},
                    {"wall_clock_seconds", result.history.wall_clock_seconds}}
                   .dump(2)
            << "\n";
  return kExitOk;
}

int cmd_eval(const Overrides& o, const Paths& p) {
  RunConfig rc = resolve(o);
  const Checkpoint ck = load_checkpoint(p.checkpoint);
  rc.model = ck.config;
  const Dataset data = load_dataset(p.data);
  Dataset subset = data;
  if (p.part != "all") subset = select(data, load_or_make_split(p.split, data, rc).ids(parse_part(p.part)));
  const EvalReport report = evaluate(ck.config, ck.params, subset, rc.threads);
  Json j = envelope("eval", rc, {{"checkpoint", p.checkpoint}, {"data", p.data}, {"split", p.split}, {"part", p.part}});
  j["checkpoint_seed"] = ck.seed;
  j["report"] = mfn::to_json(report);
  emit(j, p.out);
  return kExitOk;
}

int cmd_ablate(const Overrides& o, const Paths& p) {
  RunConfig rc = resolve(o);
  const Dataset data = load_dataset(p.data);
  resolve_model(rc, data);
  const DatasetSplit split = load_or_make_split(p.split, data, rc);
  const Dataset train_set = select(data, split.train);
  const Dataset valid_set = select(data, split.valid);
  const Dataset test_set = select(data, split.test);

  Json reports = Json::array();
  for (const Variant& v : ablation_variants(*rc.model)) {
    const MfnConfig config = rc.model->with_variant(v);
    const TrainResult result = train(config, init_params(config, rc.seed), train_set, valid_set, rc.train);
    const EvalReport report = evaluate(config, result.best_params, test_set, rc.threads);
    std::cerr << v.name() << ": " << mfn::to_json(report).dump() << "\n";
    reports.push_back({{"variant", v.name()},
                       {"parameters", result.best_params.parameter_count()},
                       {"epochs", result.history.epochs.size()},
                       {"best_epoch", result.history.best_epoch},
                       {"report", mfn::to_json(report)}});
  }
  Json j = envelope("ablate", rc, {{"data", p.data}, {"split", p.split}});
  j["reports"] = std::move(reports);
  emit(j, p.out);
  return kExitOk;
}

int cmd_gradcheck(const Overrides& o, const Paths& p, std::size_t steps, double eps, const std::string& which) {
  RunConfig rc = resolve(o);
  if (!rc.model) rc.model = MfnConfig::tiny_config();
  if (steps == 0) throw ConfigError("--steps must be >= 1");
  Rng rng(derive_seed(rc.seed, 1));
  MultiViewSequence seq;
  seq.id = "gradcheck";
  seq.group = seq.id;
  for (const auto& v : rc.model->views) {
    Tensor x = Tensor::matrix(steps, v.input_dim);
    for (double& value : x.data) value = rng.uniform(-1.0, 1.0);
    seq.views[v.name] = std::move(x);
  }
  seq.label = rc.model->task.kind == TaskKind::kClassification
                  ? static_cast<double>(rng.below(rc.model->task.classes))
                  : rng.uniform(-3.0, 3.0);

  std::vector<Variant> variants;
  if (which == "all") {
    variants = ablation_variants(*rc.model);
  } else {
    variants.push_back(Variant::parse(which));
  }
  constexpr double kTolerance = 1e-4;
  double worst = 0.0;
  Json results = Json::array();
  for (const Variant& v : variants) {
    const MfnConfig config = rc.model->with_variant(v);
    const GradCheckResult r = grad_check(config, init_params(config, rc.seed), seq, eps);
    worst = std::max(worst, r.max_relative_error);
    results.push_back({{"variant", v.name()},
                       {"max_relative_error", r.max_relative_error},
                       {"worst_parameter", r.worst_parameter},
                       {"worst_index", r.worst_index},
                       {"analytic", r.analytic},
                       {"numeric", r.numeric},
                       {"entries", r.entries}});
  }
  Json j = envelope("gradcheck", rc, {{"steps", steps}, {"eps", eps}, {"variants", which}});
  j["results"] = std::move(results);
  j["max_relative_error"] = worst;
  j["tolerance"] = kTolerance;
  j["passed"] = worst < kTolerance;
  emit(j, p.out);
  return worst < kTolerance ? kExitOk : kExitFailure;
}

int cmd_bench(const Overrides& o, const Paths& p, std::size_t repeats) {
  RunConfig rc = resolve(o);
  const Checkpoint ck = load_checkpoint(p.checkpoint);
  rc.model = ck.config;
  const Dataset data = load_dataset(p.data);
  const BenchResult b = bench(ck.config, ck.params, data, repeats, rc.threads);
  Json j = envelope("bench", rc, {{"checkpoint", p.checkpoint}, {"data", p.data}});
  j["bench"] = {{"sequences", b.sequences},
                {"repeats", b.repeats},
                {"threads", b.threads},
                {"seconds", b.seconds},
                {"inferences_per_second", b.inferences_per_second}};
  emit(j, p.out);
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Memory Fusion Network: training, evaluation and ablation of multi-view sequence models", "mfn"};
  app.require_subcommand(1);
  app.fallthrough(false);

  Overrides o;
  Paths p;
  std::size_t steps = 4, repeats = 3;
  double eps = 1e-5;
  std::string which = "all";

  CLI::App* synth = app.add_subcommand("synth", "Generate the cross-view parity dataset");
  add_common_flags(synth, o);
  add_override<std::size_t>(synth, o, "--samples", "Number of sequences",
                            [](RunConfig& rc, std::size_t v) { rc.synth.samples = v; });
  add_override<std::size_t>(synth, o, "--views", "Number of views",
                            [](RunConfig& rc, std::size_t v) { rc.synth.views = v; });
  add_override<std::size_t>(synth, o, "--steps", "Sequence length",
                            [](RunConfig& rc, std::size_t v) { rc.synth.steps = v; });
  add_override<std::size_t>(synth, o, "--input-dim", "Features per view",
                            [](RunConfig& rc, std::size_t v) { rc.synth.input_dim = v; });
  add_override<double>(synth, o, "--noise", "Gaussian noise sd", [](RunConfig& rc, double v) { rc.synth.noise_sd = v; });
  synth->add_option("--out", p.out, "Dataset path (JSONL)")->required();
  synth->add_option("--latents", p.latents, "Latent-bit sidecar (default <out>.latents.jsonl)");

  CLI::App* split = app.add_subcommand("split", "Group-disjoint train/valid/test split");
  add_common_flags(split, o);
  add_split_flags(split, o);
  split->add_option("--data", p.data, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);
  split->add_option("--out", p.out, "Manifest path (default stdout)");

  CLI::App* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  add_common_flags(train_cmd, o);
  add_model_flags(train_cmd, o);
  add_train_flags(train_cmd, o);
  add_split_flags(train_cmd, o);
  train_cmd->add_option("--data", p.data, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--split", p.split, "Split manifest (default: split the data with --seed)");
  train_cmd->add_option("--out", p.out, "Checkpoint path")->required();
  train_cmd->add_option("--history", p.history, "History path (default <out>.history.json)");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_common_flags(eval, o);
  add_split_flags(eval, o);
  eval->add_option("--checkpoint", p.checkpoint, "Checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", p.data, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", p.split, "Split manifest (default: split the data with --seed)");
  eval->add_option("--part", p.part, "train, valid, test or all")->default_str("test");
  eval->add_option("--out", p.out, "Report path (default stdout)");

  CLI::App* ablate = app.add_subcommand("ablate", "Train and evaluate every ablation variant");
  add_common_flags(ablate, o);
  add_model_flags(ablate, o);
  add_train_flags(ablate, o);
  add_split_flags(ablate, o);
  ablate->add_option("--data", p.data, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);
  ablate->add_option("--split", p.split, "Split manifest (default: split the data with --seed)");
  ablate->add_option("--out", p.out, "Report path (default stdout)");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  add_common_flags(gradcheck, o);
  gradcheck->add_option("--steps", steps, "Sequence length")->default_str("4");
  gradcheck->add_option("--eps", eps, "Finite-difference step")->default_str("1e-05");
  gradcheck->add_option("--variant", which, "Variant name or 'all'")->default_str("all");
  gradcheck->add_option("--out", p.out, "Report path (default stdout)");

  CLI::App* bench_cmd = app.add_subcommand("bench", "Measure inferences per second");
  add_common_flags(bench_cmd, o);
  bench_cmd->add_option("--checkpoint", p.checkpoint, "Checkpoint")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--data", p.data, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--repeats", repeats, "Timed passes over the data")->default_str("3");
  bench_cmd->add_option("--out", p.out, "Report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(o, p);
    if (*split) return cmd_split(o, p);
    if (*train_cmd) return cmd_train(o, p);
    if (*eval) return cmd_eval(o, p);
    if (*ablate) return cmd_ablate(o, p);
    if (*gradcheck) return cmd_gradcheck(o, p, steps, eps, which);
    if (*bench_cmd) return cmd_bench(o, p, repeats);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  std::cerr << app.help();
  return kExitUsage;
}

}  // namespace mfn::cli
