// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include "mfn/data.hpp"
#include "mfn/model.hpp"

namespace mfn {

/// Loss of one sequence computed with plain loops in `Real` arithmetic,
/// without the tape. Instantiated for double and long double; grad_check
/// uses the extended-precision version for its finite differences.
template <typename Real>
Real reference_loss(const MfnConfig& config, const MfnParams& params, const MultiViewSequence& seq);

extern template double reference_loss<double>(const MfnConfig&, const MfnParams&, const MultiViewSequence&);
extern template long double reference_loss<long double>(const MfnConfig&, const MfnParams&,
                                                        const MultiViewSequence&);

}  // namespace mfn
