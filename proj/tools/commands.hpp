// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "mfn/model.hpp"
#include "mfn/serialization.hpp"
#include "mfn/synth.hpp"
#include "mfn/training.hpp"

namespace mfn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Everything a run depends on. Built from defaults, then the JSON file given
/// with --config, then command-line flags.
struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  // Used to derive the model from the dataset when `model` is absent.
  std::string task = "auto";
  std::string variant = "full";
  std::size_t hidden_dim = 16;
  std::size_t memory_dim = 32;
  std::optional<MfnConfig> model;
  TrainConfig train;
  SynthConfig synth;
  std::array<double, 3> ratios{0.7, 0.15, 0.15};
};

Json to_json(const RunConfig& rc);
/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
RunConfig run_config_from_json(const Json& j, RunConfig base = {});

/// Parses arguments and dispatches. Returns the process exit code.
int run(int argc, char** argv);

}  // namespace mfn::cli
