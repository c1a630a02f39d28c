// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include "mfn/mlp.hpp"
#include "mfn/tape.hpp"
#include "mfn/tensor.hpp"

namespace mfn {

// Delta-memory attention: a softmax-ended MLP scores every dimension of the
// concatenated LSTM memories at t-1 and t, and the memories are rescaled by
// those scores. A single softmax spans the whole input vector.

struct AttentionOutput {
  Tensor coefficients;  // positive, sums to 1
  Tensor attended;      // memories * coefficients
};

struct AttentionVars {
  Var coefficients;
  Var attended;
};

/// `attention` must map 2*d_c -> 2*d_c and end in softmax.
AttentionVars dman_attend(Tape& tape, const MlpVars& attention, Var c_prev, Var c_curr);

/// Variant that only sees the memories at t; `attention` maps d_c -> d_c.
AttentionVars dman_attend_no_delta(Tape& tape, const MlpVars& attention, Var c_curr);

AttentionOutput dman_attend(const MlpParams& attention, const Tensor& c_prev, const Tensor& c_curr);
AttentionOutput dman_attend_no_delta(const MlpParams& attention, const Tensor& c_curr);

}  // namespace mfn
