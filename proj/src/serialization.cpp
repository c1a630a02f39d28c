// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/serialization.hpp"

#include <fstream>
#include <set>

#include "mfn/error.hpp"

namespace mfn {

namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const Json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(what) + "." + key + ": " + e.what());
  }
}

template <typename T>
void overlay(const Json& j, const char* key, T& field, const char* what) {
  if (j.contains(key)) field = get<T>(j, key, what);
}

Json task_to_json(const Task& t) {
  Json j;
  j["kind"] = t.kind == TaskKind::kRegression ? "regression" : "classification";
  if (t.kind == TaskKind::kClassification) j["classes"] = t.classes;
  return j;
}

Task task_from_json(const Json& j) {
  reject_unknown(j, {"kind", "classes"}, "task");
  const auto kind = get<std::string>(j, "kind", "task");
  if (kind == "regression") return Task::regression();
  if (kind == "classification") return Task::classification(get<std::size_t>(j, "classes", "task"));
  throw ConfigError("task.kind must be 'regression' or 'classification'");
}

Json tensor_to_json(const std::string& name, const Tensor& t) {
  Json j;
  j["name"] = name;
  j["shape"] = t.shape;
  j["data"] = t.data;
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------

Json to_json(const MfnConfig& c) {
  Json j;
  Json views = Json::array();
  for (const auto& v : c.views) views.push_back({{"name", v.name}, {"d_x", v.input_dim}, {"d_c", v.hidden_dim}});
  j["views"] = views;
  j["d_mem"] = c.memory_dim;
  j["attention_hidden"] = c.attention_hidden;
  j["attention_activation"] = activation_name(c.attention_hidden_activation);
  j["memory_hidden"] = c.memory_hidden;
  j["memory_activation"] = activation_name(c.memory_hidden_activation);
  j["variant"] = c.variant.name();
  j["task"] = task_to_json(c.task);
  return j;
}

MfnConfig mfn_config_from_json(const Json& j) {
  reject_unknown(j,
                 {"views", "d_mem", "attention_hidden", "attention_activation", "memory_hidden", "memory_activation",
                  "variant", "task"},
                 "model");
  std::vector<ViewSpec> views;
  if (!j.contains("views") || !j["views"].is_array()) throw ConfigError("model.views must be an array");
  for (const auto& v : j["views"]) {
    reject_unknown(v, {"name", "d_x", "d_c"}, "model.views[]");
    views.push_back({get<std::string>(v, "name", "view"), get<std::size_t>(v, "d_x", "view"),
                     get<std::size_t>(v, "d_c", "view")});
  }
  const std::size_t d_mem = j.contains("d_mem") ? get<std::size_t>(j, "d_mem", "model") : 64;
  const Task task = j.contains("task") ? task_from_json(j["task"]) : Task::regression();
  const Variant variant =
      j.contains("variant") ? Variant::parse(get<std::string>(j, "variant", "model")) : Variant::full();
  MfnConfig c = MfnConfig::make(std::move(views), d_mem, task, variant);
  overlay(j, "attention_hidden", c.attention_hidden, "model");
  overlay(j, "memory_hidden", c.memory_hidden, "model");
  if (j.contains("attention_activation"))
    c.attention_hidden_activation = parse_activation(get<std::string>(j, "attention_activation", "model"));
  if (j.contains("memory_activation"))
    c.memory_hidden_activation = parse_activation(get<std::string>(j, "memory_activation", "model"));
  c.validate();
  return c;
}

Json to_json(const TrainConfig& c) {
  Json j;
  j["learning_rate"] = c.learning_rate;
  j["optimizer"] = c.optimizer == OptimizerKind::kAdam ? "adam" : "sgd";
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["epsilon"] = c.epsilon;
  j["momentum"] = c.momentum;
  j["batch_size"] = c.batch_size;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["clip_norm"] = c.clip_norm;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c) {
  reject_unknown(j,
                 {"learning_rate", "optimizer", "beta1", "beta2", "epsilon", "momentum", "batch_size", "max_epochs",
                  "patience", "clip_norm", "seed", "threads"},
                 "train");
  overlay(j, "learning_rate", c.learning_rate, "train");
  if (j.contains("optimizer")) {
    const auto name = get<std::string>(j, "optimizer", "train");
    if (name == "adam") {
      c.optimizer = OptimizerKind::kAdam;
    } else if (name == "sgd") {
      c.optimizer = OptimizerKind::kSgd;
    } else {
      throw ConfigError("train.optimizer must be 'adam' or 'sgd'");
    }
  }
  overlay(j, "beta1", c.beta1, "train");
  overlay(j, "beta2", c.beta2, "train");
  overlay(j, "epsilon", c.epsilon, "train");
  overlay(j, "momentum", c.momentum, "train");
  overlay(j, "batch_size", c.batch_size, "train");
  overlay(j, "max_epochs", c.max_epochs, "train");
  overlay(j, "patience", c.patience, "train");
  overlay(j, "clip_norm", c.clip_norm, "train");
  overlay(j, "seed", c.seed, "train");
  overlay(j, "threads", c.threads, "train");
  c.validate();
  return c;
}

Json to_json(const SynthConfig& c) {
  Json j;
  j["views"] = c.views;
  j["input_dim"] = c.input_dim;
  j["steps"] = c.steps;
  j["samples"] = c.samples;
  j["noise_sd"] = c.noise_sd;
  j["seed"] = c.seed;
  return j;
}

SynthConfig synth_config_from_json(const Json& j, SynthConfig c) {
  reject_unknown(j, {"views", "input_dim", "steps", "samples", "noise_sd", "seed"}, "synth");
  overlay(j, "views", c.views, "synth");
  overlay(j, "input_dim", c.input_dim, "synth");
  overlay(j, "steps", c.steps, "synth");
  overlay(j, "samples", c.samples, "synth");
  overlay(j, "noise_sd", c.noise_sd, "synth");
  overlay(j, "seed", c.seed, "synth");
  c.validate();
  return c;
}

Json to_json(const EvalReport& r) {
  Json j;
  j["task"] = r.task;
  j["n"] = r.count;
  Json metrics = Json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  j["metrics"] = metrics;
  if (!r.undefined.empty()) {
    Json undefined = Json::object();
    for (const auto& [k, v] : r.undefined) undefined[k] = v;
    j["undefined"] = undefined;
  }
  return j;
}

Json to_json(const TrainHistory& h, bool include_timing) {
  Json j;
  j["metric"] = h.metric_name;
  j["best_epoch"] = h.best_epoch;
  Json epochs = Json::array();
  for (const auto& e : h.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"valid_loss", e.valid_loss},
                      {"valid_metric", e.valid_metric}});
  }
  j["epochs"] = epochs;
  if (include_timing) j["wall_clock_seconds"] = h.wall_clock_seconds;
  return j;
}

TrainHistory train_history_from_json(const Json& j) {
  TrainHistory h;
  h.metric_name = get<std::string>(j, "metric", "history");
  h.best_epoch = get<std::size_t>(j, "best_epoch", "history");
  for (const auto& e : j.at("epochs")) {
    h.epochs.push_back({get<std::size_t>(e, "epoch", "epoch"), get<double>(e, "train_loss", "epoch"),
                        get<double>(e, "valid_loss", "epoch"), get<double>(e, "valid_metric", "epoch")});
  }
  if (j.contains("wall_clock_seconds")) h.wall_clock_seconds = get<double>(j, "wall_clock_seconds", "history");
  return h;
}

Json to_json(const DatasetSplit& s) {
  Json j;
  j["seed"] = s.seed;
  j["ratios"] = s.ratios;
  j["train"] = s.train;
  j["valid"] = s.valid;
  j["test"] = s.test;
  Json groups = Json::object();
  for (const auto& [g, part] : s.group_assignment) groups[g] = split_part_name(part);
  j["groups"] = groups;
  return j;
}

DatasetSplit dataset_split_from_json(const Json& j) {
  reject_unknown(j, {"seed", "ratios", "train", "valid", "test", "groups"}, "split manifest");
  DatasetSplit s;
  s.seed = get<std::uint64_t>(j, "seed", "split");
  s.ratios = get<std::array<double, 3>>(j, "ratios", "split");
  s.train = get<std::vector<std::string>>(j, "train", "split");
  s.valid = get<std::vector<std::string>>(j, "valid", "split");
  s.test = get<std::vector<std::string>>(j, "test", "split");
  for (const auto& [g, name] : j.at("groups").items()) {
    const auto part = name.get<std::string>();
    if (part == "train") {
      s.group_assignment[g] = SplitPart::kTrain;
    } else if (part == "valid") {
      s.group_assignment[g] = SplitPart::kValid;
    } else if (part == "test") {
      s.group_assignment[g] = SplitPart::kTest;
    } else {
      throw ConfigError("split manifest: group '" + g + "' assigned to unknown split '" + part + "'");
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

Json to_json(const Checkpoint& c) {
  Json j;
  j["format"] = "mfn-checkpoint";
  j["version"] = kCheckpointVersion;
  j["seed"] = c.seed;
  j["config"] = to_json(c.config);
  j["run_config"] = c.run_config;
  Json params = Json::array();
  for (const auto& [name, t] : c.params.tensors(c.config)) params.push_back(tensor_to_json(name, *t));
  j["params"] = params;
  return j;
}

Checkpoint checkpoint_from_json(const Json& j) {
  if (!j.is_object() || j.value("format", "") != "mfn-checkpoint") throw ParseError("not an MFN checkpoint");
  const int version = j.value("version", 0);
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.config = mfn_config_from_json(j.at("config"));
  c.run_config = j.value("run_config", Json::object());
  c.params = zero_params(c.config);
  const auto slots = c.params.tensors(c.config);
  const auto& stored = j.at("params");
  if (!stored.is_array() || stored.size() != slots.size()) {
    throw ParseError("checkpoint holds " + std::to_string(stored.size()) + " tensors, config needs " +
                     std::to_string(slots.size()));
  }
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const auto& entry = stored[k];
    const auto name = entry.at("name").get<std::string>();
    if (name != slots[k].first) {
      throw ParseError("checkpoint tensor " + std::to_string(k) + " is '" + name + "', expected '" + slots[k].first +
                       "'");
    }
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    if (shape != slots[k].second->shape) {
      throw ParseError("checkpoint tensor '" + name + "' has shape " + shape_string(shape) + ", expected " +
                       shape_string(slots[k].second->shape));
    }
    auto data = entry.at("data").get<std::vector<double>>();
    if (data.size() != slots[k].second->size()) throw ParseError("checkpoint tensor '" + name + "' has wrong length");
    slots[k].second->data = std::move(data);
    if (!slots[k].second->all_finite()) throw NumericError("checkpoint tensor '" + name + "' is not finite");
  }
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_json_file(to_json(checkpoint), path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(read_json_file(path)); }

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

}  // namespace mfn
