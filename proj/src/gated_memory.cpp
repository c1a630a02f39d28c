// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/gated_memory.hpp"

#include <string>

#include "mfn/error.hpp"

namespace mfn {

MemoryNetVars bind(Tape& tape, const MemoryNets& nets) {
  return {bind(tape, nets.proposal), bind(tape, nets.retain), bind(tape, nets.update)};
}

MemoryVars memory_update(Tape& tape, const MemoryNetVars& nets, Var c_hat, Var u_prev) {
  const Var proposal = mlp_forward(tape, nets.proposal, c_hat);
  const Var retain = mlp_forward(tape, nets.retain, c_hat);
  const Var update = mlp_forward(tape, nets.update, c_hat);
  const std::size_t d_mem = tape.size(u_prev);
  if (tape.size(proposal) != d_mem || tape.size(retain) != d_mem || tape.size(update) != d_mem) {
    throw DimensionError("memory networks must emit " + std::to_string(d_mem) + " values (got " +
                         std::to_string(tape.size(proposal)) + ", " + std::to_string(tape.size(retain)) + ", " +
                         std::to_string(tape.size(update)) + ")");
  }
  const Var u = tape.add(tape.hadamard(retain, u_prev), tape.hadamard(update, tape.tanh(proposal)));
  return {u, proposal, retain, update};
}

MemoryState memory_update(const MemoryNets& nets, const Tensor& c_hat, const Tensor& u_prev) {
  Tape tape;
  const MemoryNetVars vars = bind(tape, nets);
  const MemoryVars out = memory_update(tape, vars, tape.constant(c_hat), tape.constant(u_prev));
  return {tape.value_tensor(out.u), tape.value_tensor(out.proposal), tape.value_tensor(out.retain),
          tape.value_tensor(out.update)};
}

}  // namespace mfn
