// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/mlp.hpp"

#include <cmath>
#include <string>

#include "mfn/error.hpp"

namespace mfn {

std::size_t MlpParams::input_dim() const { return weights.empty() ? 0 : weights.front().cols(); }

std::size_t MlpParams::output_dim() const { return weights.empty() ? 0 : weights.back().rows(); }

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

void MlpParams::validate() const {
  if (weights.empty() || weights.size() != biases.size()) {
    throw DimensionError("MLP needs one bias per weight matrix and at least one layer");
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].rank() != 2 || biases[k].rank() != 1 || biases[k].size() != weights[k].rows()) {
      throw DimensionError("MLP layer " + std::to_string(k) + ": weight " + shape_string(weights[k].shape) +
                           " and bias " + shape_string(biases[k].shape) + " disagree");
    }
    if (k > 0 && weights[k].cols() != weights[k - 1].rows()) {
      throw DimensionError("MLP layer " + std::to_string(k) + " expects " + std::to_string(weights[k].cols()) +
                           " inputs but previous layer emits " + std::to_string(weights[k - 1].rows()));
    }
  }
  if (hidden_activation == Activation::kSoftmax) throw ConfigError("softmax is not a hidden activation");
}

std::size_t mlp_parameter_count(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output) {
  std::size_t n = 0;
  std::size_t prev = input;
  for (std::size_t h : hidden) {
    n += prev * h + h;
    prev = h;
  }
  return n + prev * output + output;
}

MlpParams zero_mlp(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output,
                   Activation hidden_activation, Activation output_activation) {
  MlpParams p;
  p.hidden_activation = hidden_activation;
  p.output_activation = output_activation;
  std::size_t prev = input;
  for (std::size_t h : hidden) {
    p.weights.push_back(Tensor::matrix(h, prev));
    p.biases.push_back(Tensor::vector(h));
    prev = h;
  }
  p.weights.push_back(Tensor::matrix(output, prev));
  p.biases.push_back(Tensor::vector(output));
  p.validate();
  return p;
}

void glorot_fill(Tensor& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (double& v : w.data) v = rng.uniform(-limit, limit);
}

MlpParams glorot_mlp(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output,
                     Activation hidden_activation, Activation output_activation, Rng& rng) {
  MlpParams p = zero_mlp(input, hidden, output, hidden_activation, output_activation);
  for (auto& w : p.weights) glorot_fill(w, rng);
  return p;
}

MlpVars bind(Tape& tape, const MlpParams& params) {
  params.validate();
  MlpVars vars;
  vars.hidden_activation = params.hidden_activation;
  vars.output_activation = params.output_activation;
  vars.input_dim = params.input_dim();
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    vars.weights.push_back(tape.parameter(params.weights[k]));
    vars.biases.push_back(tape.parameter(params.biases[k]));
  }
  return vars;
}

Var mlp_forward(Tape& tape, const MlpVars& mlp, Var input) {
  if (tape.size(input) != mlp.input_dim) {
    throw DimensionError("MLP expects input of length " + std::to_string(mlp.input_dim) + ", got " +
                         std::to_string(tape.size(input)));
  }
  Var h = input;
  const std::size_t layers = mlp.weights.size();
  for (std::size_t k = 0; k < layers; ++k) {
    h = tape.affine({mlp.weights[k]}, {h}, mlp.biases[k]);
    h = tape.activate(h, k + 1 < layers ? mlp.hidden_activation : mlp.output_activation);
  }
  return h;
}

Tensor mlp_forward(const MlpParams& params, const Tensor& input) {
  Tape tape;
  const MlpVars vars = bind(tape, params);
  return tape.value_tensor(mlp_forward(tape, vars, tape.constant(input)));
}

}  // namespace mfn
