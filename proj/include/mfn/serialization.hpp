// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "mfn/data.hpp"
#include "mfn/metrics.hpp"
#include "mfn/model.hpp"
#include "mfn/synth.hpp"
#include "mfn/training.hpp"

namespace mfn {

using Json = nlohmann::ordered_json;

// Config documents. Missing optional fields take the library defaults; the
// hidden widths of the attention/memory networks default from the view and
// memory sizes. Unknown keys are rejected.
Json to_json(const MfnConfig& config);
MfnConfig mfn_config_from_json(const Json& j);

Json to_json(const TrainConfig& config);
/// Overlays the keys present in `j` on `base`.
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});

Json to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const Json& j, SynthConfig base = {});

Json to_json(const EvalReport& report);

/// Wall-clock time is only written when `include_timing` is set, so that two
/// identical runs produce byte-identical files.
Json to_json(const TrainHistory& history, bool include_timing = false);
TrainHistory train_history_from_json(const Json& j);

Json to_json(const DatasetSplit& split);
DatasetSplit dataset_split_from_json(const Json& j);

/// Model checkpoint: config, flat named parameter arrays, root seed and the
/// resolved run configuration. Doubles are written in shortest round-trip
/// form, so save/load is value-exact.
struct Checkpoint {
  MfnConfig config;
  MfnParams params;
  std::uint64_t seed = 0;
  Json run_config = Json::object();
};

inline constexpr int kCheckpointVersion = 1;

Json to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const Json& j);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const Json& j, const std::filesystem::path& path);

}  // namespace mfn
