// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/experiment.hpp"

#include <chrono>
#include <cmath>

#include "mfn/error.hpp"
#include "mfn/training.hpp"

namespace mfn {

std::vector<Variant> ablation_variants(const MfnConfig& config) {
  std::vector<Variant> out = {Variant::full(), Variant::no_delta(), Variant::no_memory()};
  for (const auto& v : config.views) out.push_back(Variant::single_view(v.name));
  return out;
}

Task infer_task(const Dataset& data) {
  double max_label = 0.0;
  for (const auto& seq : data) {
    const double y = seq.label;
    if (y < 0.0 || y != std::floor(y) || y >= 64.0) return Task::regression();
    max_label = std::max(max_label, y);
  }
  if (data.empty()) return Task::regression();
  return Task::classification(std::max<std::size_t>(2, static_cast<std::size_t>(max_label) + 1));
}

Task parse_task(const std::string& name, const Dataset& data) {
  if (name == "auto") return infer_task(data);
  if (name == "regression") return Task::regression();
  const std::string prefix = "classification:";
  if (name.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const unsigned long k = std::stoul(name.substr(prefix.size()), &used);
      if (used == name.size() - prefix.size() && k >= 2) return Task::classification(k);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("unknown task '" + name + "' (expected auto, regression or classification:<k>)");
}

std::string task_name(const Task& task) {
  return task.kind == TaskKind::kRegression ? "regression" : "classification:" + std::to_string(task.classes);
}

MfnConfig config_for(const Dataset& data, std::size_t hidden_dim, std::size_t memory_dim, Task task,
                     Variant variant) {
  if (data.empty()) throw DomainError("cannot derive a model config from an empty dataset");
  std::vector<ViewSpec> views;
  for (const auto& s : schema_of(data.front())) views.push_back({s.name, s.dim, hidden_dim});
  return MfnConfig::make(std::move(views), memory_dim, task, std::move(variant));
}

BenchResult bench(const MfnConfig& config, const MfnParams& params, const Dataset& data, std::size_t repeats,
                  std::size_t threads) {
  if (data.empty()) throw DomainError("bench needs a non-empty dataset");
  if (repeats == 0) throw DomainError("bench needs at least one repeat");
  predict_all(config, params, data, threads);
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t r = 0; r < repeats; ++r) predict_all(config, params, data, threads);
  BenchResult out;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.sequences = data.size();
  out.repeats = repeats;
  out.threads = threads;
  out.inferences_per_second = static_cast<double>(data.size() * repeats) / std::max(out.seconds, 1e-12);
  return out;
}

}  // namespace mfn
