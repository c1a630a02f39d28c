// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/dman.hpp"

#include <string>

#include "mfn/error.hpp"

namespace mfn {

namespace {

AttentionVars attend(Tape& tape, const MlpVars& attention, Var memories) {
  if (attention.output_activation != Activation::kSoftmax) {
    throw ConfigError("attention network must end in softmax");
  }
  const Var a = mlp_forward(tape, attention, memories);
  if (tape.size(a) != tape.size(memories)) {
    throw DimensionError("attention network emits " + std::to_string(tape.size(a)) + " scores for " +
                         std::to_string(tape.size(memories)) + " memory dimensions");
  }
  return {a, tape.hadamard(memories, a)};
}

}  // namespace

AttentionVars dman_attend(Tape& tape, const MlpVars& attention, Var c_prev, Var c_curr) {
  if (tape.size(c_prev) != tape.size(c_curr)) {
    throw DimensionError("memories at t-1 and t differ in length (" + std::to_string(tape.size(c_prev)) + " vs " +
                         std::to_string(tape.size(c_curr)) + ")");
  }
  return attend(tape, attention, tape.concat({c_prev, c_curr}));
}

AttentionVars dman_attend_no_delta(Tape& tape, const MlpVars& attention, Var c_curr) {
  return attend(tape, attention, c_curr);
}

AttentionOutput dman_attend(const MlpParams& attention, const Tensor& c_prev, const Tensor& c_curr) {
  Tape tape;
  const MlpVars vars = bind(tape, attention);
  const AttentionVars out = dman_attend(tape, vars, tape.constant(c_prev), tape.constant(c_curr));
  return {tape.value_tensor(out.coefficients), tape.value_tensor(out.attended)};
}

AttentionOutput dman_attend_no_delta(const MlpParams& attention, const Tensor& c_curr) {
  Tape tape;
  const MlpVars vars = bind(tape, attention);
  const AttentionVars out = dman_attend_no_delta(tape, vars, tape.constant(c_curr));
  return {tape.value_tensor(out.coefficients), tape.value_tensor(out.attended)};
}

}  // namespace mfn
