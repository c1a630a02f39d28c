// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>

#include "mfn/random.hpp"
#include "mfn/tape.hpp"
#include "mfn/tensor.hpp"

namespace mfn {

/// Gate order used by every per-gate array below.
enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kProposal = 3 };

inline constexpr std::array<const char*, 4> kGateNames = {"i", "f", "o", "m"};

/// One view's LSTM. w[g] is [d_c x d_x], u[g] is [d_c x d_c], b[g] is [d_c].
struct LstmParams {
  std::array<Tensor, 4> w;
  std::array<Tensor, 4> u;
  std::array<Tensor, 4> b;

  std::size_t input_dim() const { return w[0].cols(); }
  std::size_t hidden_dim() const { return w[0].rows(); }
  std::size_t parameter_count() const;
  void validate() const;

  bool operator==(const LstmParams&) const = default;
};

std::size_t lstm_parameter_count(std::size_t input_dim, std::size_t hidden_dim);

LstmParams zero_lstm(std::size_t input_dim, std::size_t hidden_dim);

/// Glorot-uniform W and U, zero biases except the forget bias, which is 1.
LstmParams init_lstm(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);

struct LstmState {
  Tensor c;
  Tensor h;

  static LstmState zeros(std::size_t hidden_dim);
};

struct LstmStepResult {
  LstmState state;
  /// i, f, o, m in Gate order.
  std::array<Tensor, 4> gates;
};

struct LstmVars {
  std::array<Var, 4> w;
  std::array<Var, 4> u;
  std::array<Var, 4> b;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
};

struct LstmStateVars {
  Var c;
  Var h;
};

LstmVars bind(Tape& tape, const LstmParams& params);

/// i,f,o = sigmoid(W x + U h + b); m = W_m x + U_m h + b_m (no squashing);
/// c' = f*c + i*m; h' = o*tanh(c'). Gate nodes are written to `gates` when
/// non-null.
LstmStateVars lstm_step(Tape& tape, const LstmVars& lstm, Var x, LstmStateVars prev,
                        std::array<Var, 4>* gates = nullptr);

LstmStepResult lstm_step(const LstmParams& params, const Tensor& x, const LstmState& prev);

/// Steps every view's LSTM once. The three maps must have identical key sets;
/// otherwise SchemaError names the first offending view.
std::map<std::string, LstmState> system_step(const std::map<std::string, LstmParams>& params,
                                             const std::map<std::string, Tensor>& inputs,
                                             const std::map<std::string, LstmState>& prev);

}  // namespace mfn
