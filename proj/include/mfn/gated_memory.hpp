// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include "mfn/mlp.hpp"
#include "mfn/tape.hpp"
#include "mfn/tensor.hpp"

namespace mfn {

/// The three networks driving the multi-view gated memory. `proposal` ends in
/// identity (tanh is applied by the update rule); both gates end in sigmoid.
struct MemoryNets {
  MlpParams proposal;
  MlpParams retain;
  MlpParams update;
};

struct MemoryNetVars {
  MlpVars proposal;
  MlpVars retain;
  MlpVars update;
};

MemoryNetVars bind(Tape& tape, const MemoryNets& nets);

struct MemoryState {
  Tensor u;
  Tensor proposal;  // u_hat
  Tensor retain;    // gamma_1
  Tensor update;    // gamma_2
};

struct MemoryVars {
  Var u;
  Var proposal;
  Var retain;
  Var update;
};

/// u = retain(c_hat) * u_prev + update(c_hat) * tanh(proposal(c_hat)).
/// u itself is never squashed.
MemoryVars memory_update(Tape& tape, const MemoryNetVars& nets, Var c_hat, Var u_prev);

MemoryState memory_update(const MemoryNets& nets, const Tensor& c_hat, const Tensor& u_prev);

}  // namespace mfn
