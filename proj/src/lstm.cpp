// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/lstm.hpp"

#include "mfn/error.hpp"
#include "mfn/mlp.hpp"

namespace mfn {

std::size_t lstm_parameter_count(std::size_t input_dim, std::size_t hidden_dim) {
  return 4 * (input_dim * hidden_dim + hidden_dim * hidden_dim + hidden_dim);
}

std::size_t LstmParams::parameter_count() const { return lstm_parameter_count(input_dim(), hidden_dim()); }

void LstmParams::validate() const {
  const std::size_t dx = input_dim();
  const std::size_t dc = hidden_dim();
  for (std::size_t g = 0; g < 4; ++g) {
    const bool ok = w[g].rank() == 2 && w[g].rows() == dc && w[g].cols() == dx && u[g].rank() == 2 &&
                    u[g].rows() == dc && u[g].cols() == dc && b[g].rank() == 1 && b[g].size() == dc;
    if (!ok) {
      throw DimensionError(std::string("LSTM gate ") + kGateNames[g] + ": W " + shape_string(w[g].shape) + ", U " +
                           shape_string(u[g].shape) + ", b " + shape_string(b[g].shape) + " inconsistent");
    }
  }
}

LstmParams zero_lstm(std::size_t input_dim, std::size_t hidden_dim) {
  LstmParams p;
  for (std::size_t g = 0; g < 4; ++g) {
    p.w[g] = Tensor::matrix(hidden_dim, input_dim);
    p.u[g] = Tensor::matrix(hidden_dim, hidden_dim);
    p.b[g] = Tensor::vector(hidden_dim);
  }
  return p;
}

LstmParams init_lstm(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  LstmParams p = zero_lstm(input_dim, hidden_dim);
  for (std::size_t g = 0; g < 4; ++g) {
    glorot_fill(p.w[g], rng);
    glorot_fill(p.u[g], rng);
  }
  for (double& v : p.b[kForgetGate].data) v = 1.0;
  return p;
}

LstmState LstmState::zeros(std::size_t hidden_dim) {
  return LstmState{Tensor::vector(hidden_dim), Tensor::vector(hidden_dim)};
}

LstmVars bind(Tape& tape, const LstmParams& params) {
  params.validate();
  LstmVars vars;
  vars.input_dim = params.input_dim();
  vars.hidden_dim = params.hidden_dim();
  for (std::size_t g = 0; g < 4; ++g) {
    vars.w[g] = tape.parameter(params.w[g]);
    vars.u[g] = tape.parameter(params.u[g]);
    vars.b[g] = tape.parameter(params.b[g]);
  }
  return vars;
}

LstmStateVars lstm_step(Tape& tape, const LstmVars& lstm, Var x, LstmStateVars prev, std::array<Var, 4>* gates) {
  if (tape.size(x) != lstm.input_dim) {
    throw DimensionError("LSTM expects input of length " + std::to_string(lstm.input_dim) + ", got " +
                         std::to_string(tape.size(x)));
  }
  if (tape.size(prev.c) != lstm.hidden_dim || tape.size(prev.h) != lstm.hidden_dim) {
    throw DimensionError("LSTM state length does not match hidden size " + std::to_string(lstm.hidden_dim));
  }
  std::array<Var, 4> g;
  for (std::size_t k = 0; k < 4; ++k) {
    const Var pre = tape.affine({lstm.w[k], lstm.u[k]}, {x, prev.h}, lstm.b[k]);
    g[k] = k == kProposal ? pre : tape.sigmoid(pre);
  }
  const Var c = tape.add(tape.hadamard(g[kForgetGate], prev.c), tape.hadamard(g[kInputGate], g[kProposal]));
  const Var h = tape.hadamard(g[kOutputGate], tape.tanh(c));
  if (gates) *gates = g;
  return {c, h};
}

LstmStepResult lstm_step(const LstmParams& params, const Tensor& x, const LstmState& prev) {
  Tape tape;
  const LstmVars vars = bind(tape, params);
  std::array<Var, 4> gates;
  const LstmStateVars next =
      lstm_step(tape, vars, tape.constant(x), {tape.constant(prev.c), tape.constant(prev.h)}, &gates);
  LstmStepResult out;
  out.state = {tape.value_tensor(next.c), tape.value_tensor(next.h)};
  for (std::size_t k = 0; k < 4; ++k) out.gates[k] = tape.value_tensor(gates[k]);
  return out;
}

std::map<std::string, LstmState> system_step(const std::map<std::string, LstmParams>& params,
                                             const std::map<std::string, Tensor>& inputs,
                                             const std::map<std::string, LstmState>& prev) {
  for (const auto& [name, _] : inputs) {
    if (!params.count(name)) throw SchemaError("input for unknown view '" + name + "'");
  }
  for (const auto& [name, _] : prev) {
    if (!params.count(name)) throw SchemaError("state for unknown view '" + name + "'");
  }
  std::map<std::string, LstmState> next;
  for (const auto& [name, p] : params) {
    const auto x = inputs.find(name);
    if (x == inputs.end()) throw SchemaError("missing input for view '" + name + "'");
    const auto s = prev.find(name);
    if (s == prev.end()) throw SchemaError("missing state for view '" + name + "'");
    next.emplace(name, lstm_step(p, x->second, s->second).state);
  }
  return next;
}

}  // namespace mfn
