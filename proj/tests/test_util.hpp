// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "mfn/model.hpp"
#include "mfn/random.hpp"

namespace testutil {

inline mfn::Tensor random_tensor(std::vector<std::size_t> shape, mfn::Rng& rng, double scale = 1.0) {
  mfn::Tensor t = mfn::Tensor::zeros(std::move(shape));
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

inline mfn::MultiViewSequence random_sequence(const mfn::MfnConfig& config, std::size_t steps, mfn::Rng& rng,
                                              const std::string& id = "seq") {
  mfn::MultiViewSequence seq;
  seq.id = id;
  seq.group = id;
  for (const auto& v : config.views) seq.views[v.name] = random_tensor({steps, v.input_dim}, rng);
  seq.label = config.task.kind == mfn::TaskKind::kClassification
                  ? static_cast<double>(rng.below(config.task.classes))
                  : rng.uniform(-3.0, 3.0);
  return seq;
}

/// Randomizes every parameter (uniform in [-scale, scale]) so that tests do
/// not depend on the initializer's zero biases.
inline void randomize(mfn::MfnParams& params, const mfn::MfnConfig& config, mfn::Rng& rng, double scale = 0.5) {
  for (auto& [_, t] : params.tensors(config))
    for (double& v : t->data) v = rng.uniform(-scale, scale);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Central finite difference of f with respect to x[i].
inline double central_difference(const std::function<double()>& f, double& x, double eps = 1e-5) {
  const double saved = x;
  x = saved + eps;
  const double plus = f();
  x = saved - eps;
  const double minus = f();
  x = saved;
  return (plus - minus) / (2.0 * eps);
}

}  // namespace testutil
