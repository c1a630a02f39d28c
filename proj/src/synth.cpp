// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/synth.hpp"

#include <ostream>

#include "json.hpp"
#include "mfn/error.hpp"
#include "mfn/random.hpp"

namespace mfn {

void SynthConfig::validate() const {
  if (views == 0 || input_dim == 0 || steps == 0 || samples == 0) {
    throw ConfigError("synthetic task needs views, input_dim, steps and samples >= 1");
  }
  if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be >= 0");
}

std::string synth_view_name(std::size_t index) { return "view" + std::to_string(index); }

int parity_label(std::span<const int> bits) {
  int product = 1;
  for (int b : bits) product *= b;
  return product > 0 ? 1 : 0;
}

SynthDataset gen_crossview_task(const SynthConfig& cfg) {
  cfg.validate();
  Rng root(cfg.seed);
  std::vector<std::size_t> channels(cfg.views);
  for (auto& c : channels) c = static_cast<std::size_t>(root.below(cfg.input_dim));

  SynthDataset out;
  out.data.reserve(cfg.samples);
  out.latents.reserve(cfg.samples);
  const int width = static_cast<int>(std::to_string(cfg.samples - 1).size());
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    Rng rng(derive_seed(cfg.seed, i + 1));
    std::string number = std::to_string(i);
    number.insert(0, static_cast<std::size_t>(width) - number.size(), '0');

    LatentRecord latent;
    latent.id = "s" + number;
    latent.channels = channels;
    MultiViewSequence seq;
    seq.id = latent.id;
    seq.group = latent.id;
    for (std::size_t n = 0; n < cfg.views; ++n) {
      const int bit = rng.below(2) ? 1 : -1;
      const std::size_t step = static_cast<std::size_t>(rng.below(cfg.steps));
      Tensor m = Tensor::matrix(cfg.steps, cfg.input_dim);
      for (double& v : m.data) {
        const double z = rng.normal();
        v = cfg.noise_sd > 0.0 ? cfg.noise_sd * z : 0.0;
      }
      m.at(step, channels[n]) = static_cast<double>(bit);
      latent.bits.push_back(bit);
      latent.pulse_steps.push_back(step);
      seq.views.emplace(synth_view_name(n), std::move(m));
    }
    latent.label = parity_label(latent.bits);
    seq.label = latent.label;
    out.data.push_back(std::move(seq));
    out.latents.push_back(std::move(latent));
  }
  return out;
}

void write_latents(const std::vector<LatentRecord>& latents, std::ostream& out) {
  for (const auto& l : latents) {
    nlohmann::json j;
    j["id"] = l.id;
    j["bits"] = l.bits;
    j["pulse_steps"] = l.pulse_steps;
    j["channels"] = l.channels;
    j["label"] = l.label;
    out << j.dump() << '\n';
  }
}

}  // namespace mfn
