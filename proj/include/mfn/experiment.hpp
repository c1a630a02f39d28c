// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mfn/data.hpp"
#include "mfn/model.hpp"

namespace mfn {

/// full, no_delta, no_mem, then single_view for every view in config order.
std::vector<Variant> ablation_variants(const MfnConfig& config);

/// classification:k when every label is a non-negative integer below 64
/// (k = max label + 1, at least 2); regression otherwise.
Task infer_task(const Dataset& data);

/// Parses "regression", "classification:<k>" or "auto" (uses infer_task).
Task parse_task(const std::string& name, const Dataset& data);
std::string task_name(const Task& task);

/// Model config whose views follow the dataset schema (name order), each
/// with `hidden_dim` memory cells.
MfnConfig config_for(const Dataset& data, std::size_t hidden_dim, std::size_t memory_dim, Task task,
                     Variant variant = Variant::full());

struct BenchResult {
  std::size_t sequences = 0;
  std::size_t repeats = 0;
  std::size_t threads = 1;
  double seconds = 0.0;
  double inferences_per_second = 0.0;
};

/// Times predict_all over `data`, `repeats` times, after one warm-up pass.
BenchResult bench(const MfnConfig& config, const MfnParams& params, const Dataset& data, std::size_t repeats = 3,
                  std::size_t threads = 1);

}  // namespace mfn
