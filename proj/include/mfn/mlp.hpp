// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <cstddef>
#include <vector>

#include "mfn/random.hpp"
#include "mfn/tape.hpp"
#include "mfn/tensor.hpp"

namespace mfn {

/// Fully connected network: (affine -> hidden activation)* -> affine -> output
/// activation. weights[k] is [out x in]; an MLP with no hidden layer is a
/// single affine map.
struct MlpParams {
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;
  Activation hidden_activation = Activation::kRelu;
  Activation output_activation = Activation::kIdentity;

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;
  /// Throws DimensionError if consecutive layers do not chain.
  void validate() const;

  bool operator==(const MlpParams&) const = default;
};

/// Number of trainable values in an MLP with the given layer widths.
std::size_t mlp_parameter_count(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output);

/// All-zero parameters; used by closed-form tests.
MlpParams zero_mlp(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output,
                   Activation hidden_activation, Activation output_activation);

/// Glorot-uniform weights, zero biases.
MlpParams glorot_mlp(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output,
                     Activation hidden_activation, Activation output_activation, Rng& rng);

void glorot_fill(Tensor& w, Rng& rng);

/// MLP parameters recorded on a tape.
struct MlpVars {
  std::vector<Var> weights;
  std::vector<Var> biases;
  Activation hidden_activation = Activation::kRelu;
  Activation output_activation = Activation::kIdentity;
  std::size_t input_dim = 0;
};

MlpVars bind(Tape& tape, const MlpParams& params);

Var mlp_forward(Tape& tape, const MlpVars& mlp, Var input);

/// Value-level forward on a private tape.
Tensor mlp_forward(const MlpParams& params, const Tensor& input);

}  // namespace mfn
