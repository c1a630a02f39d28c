// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mfn/data.hpp"

namespace mfn {

/// Cross-view parity task. Each view n carries one latent bit b_n in {-1,+1}
/// as a single pulse of value b_n in that view's dedicated channel (drawn
/// once per dataset) at a per-sample random step. Every other cell is
/// N(0, noise_sd^2). The label is 1 when prod(b_n) > 0, else 0, so no single
/// view says anything about the label.
struct SynthConfig {
  std::size_t views = 3;
  std::size_t input_dim = 8;
  std::size_t steps = 20;
  std::size_t samples = 2000;
  double noise_sd = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LatentRecord {
  std::string id;
  std::vector<int> bits;
  std::vector<std::size_t> pulse_steps;
  std::vector<std::size_t> channels;
  int label = 0;
};

struct SynthDataset {
  Dataset data;
  std::vector<LatentRecord> latents;
};

/// View names used by the generator: "view0", "view1", ...
std::string synth_view_name(std::size_t index);

/// 1 if the product of the bits is positive.
int parity_label(std::span<const int> bits);

/// Deterministic in `cfg.seed`; sample i draws from its own derived stream.
/// Each sample is its own group.
SynthDataset gen_crossview_task(const SynthConfig& cfg);

/// JSONL sidecar: {"id", "bits", "pulse_steps", "channels", "label"} per line.
void write_latents(const std::vector<LatentRecord>& latents, std::ostream& out);

}  // namespace mfn
