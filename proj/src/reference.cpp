// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/reference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfn/error.hpp"

namespace mfn {

namespace {

template <typename Real>
using Vec = std::vector<Real>;

template <typename Real>
Vec<Real> affine(const Tensor& w, const Vec<Real>& x, Vec<Real> acc) {
  const std::size_t cols = w.cols();
  for (std::size_t i = 0; i < w.rows(); ++i) {
    Real s = 0;
    for (std::size_t j = 0; j < cols; ++j) s += static_cast<Real>(w.data[i * cols + j]) * x[j];
    acc[i] += s;
  }
  return acc;
}

template <typename Real>
Vec<Real> lift(const Tensor& t) {
  return Vec<Real>(t.data.begin(), t.data.end());
}

template <typename Real>
Real sigmoid(Real x) {
  return Real(1) / (Real(1) + std::exp(-x));
}

template <typename Real>
Vec<Real> activate(Vec<Real> v, Activation kind) {
  switch (kind) {
    case Activation::kIdentity: break;
    case Activation::kSigmoid:
      for (Real& x : v) x = sigmoid(x);
      break;
    case Activation::kTanh:
      for (Real& x : v) x = std::tanh(x);
      break;
    case Activation::kRelu:
      for (Real& x : v) x = x > 0 ? x : Real(0);
      break;
    case Activation::kSoftmax: {
      const Real m = *std::max_element(v.begin(), v.end());
      Real s = 0;
      for (Real& x : v) s += (x = std::exp(x - m));
      for (Real& x : v) x /= s;
      break;
    }
  }
  return v;
}

template <typename Real>
Vec<Real> mlp(const MlpParams& p, Vec<Real> x) {
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    x = affine(p.weights[k], x, lift<Real>(p.biases[k]));
    x = activate(std::move(x), k + 1 < p.weights.size() ? p.hidden_activation : p.output_activation);
  }
  return x;
}

}  // namespace

template <typename Real>
Real reference_loss(const MfnConfig& config, const MfnParams& params, const MultiViewSequence& seq) {
  check_sequence(config, seq);
  const auto views = config.active_views();
  if (params.lstms.size() != views.size()) throw SchemaError("parameters do not match the variant");
  const bool memory = config.variant.has_memory();
  const bool delta = config.variant.kind == VariantKind::kFull;

  std::vector<Vec<Real>> c(views.size()), h(views.size());
  for (std::size_t k = 0; k < views.size(); ++k) {
    c[k].assign(views[k].hidden_dim, Real(0));
    h[k].assign(views[k].hidden_dim, Real(0));
  }
  Vec<Real> c_prev(config.total_hidden(), Real(0));
  Vec<Real> u(config.memory_dim, Real(0));

  for (std::size_t t = 0; t < seq.length(); ++t) {
    Vec<Real> c_now;
    for (std::size_t k = 0; k < views.size(); ++k) {
      const LstmParams& p = params.lstms[k];
      const auto row = seq.views.at(views[k].name).row(t);
      const Vec<Real> x(row.begin(), row.end());
      Vec<Real> gate[4];
      for (std::size_t g = 0; g < 4; ++g) gate[g] = affine(p.u[g], h[k], affine(p.w[g], x, lift<Real>(p.b[g])));
      for (std::size_t i = 0; i < c[k].size(); ++i) {
        const Real in = sigmoid(gate[kInputGate][i]);
        const Real forget = sigmoid(gate[kForgetGate][i]);
        const Real out = sigmoid(gate[kOutputGate][i]);
        c[k][i] = forget * c[k][i] + in * gate[kProposal][i];
        h[k][i] = out * std::tanh(c[k][i]);
      }
      c_now.insert(c_now.end(), c[k].begin(), c[k].end());
    }
    if (!memory) continue;
    Vec<Real> cat;
    if (delta) cat = c_prev;
    cat.insert(cat.end(), c_now.begin(), c_now.end());
    const Vec<Real> a = mlp(*params.attention, cat);
    for (std::size_t i = 0; i < cat.size(); ++i) cat[i] *= a[i];
    const Vec<Real> proposal = mlp(params.memory->proposal, cat);
    const Vec<Real> retain = mlp(params.memory->retain, cat);
    const Vec<Real> update = mlp(params.memory->update, cat);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = retain[i] * u[i] + update[i] * std::tanh(proposal[i]);
    c_prev = std::move(c_now);
  }

  Vec<Real> features;
  for (const auto& hk : h) features.insert(features.end(), hk.begin(), hk.end());
  if (memory) features.insert(features.end(), u.begin(), u.end());
  const Vec<Real> out = affine(params.head.weight, features, lift<Real>(params.head.bias));

  if (config.task.kind == TaskKind::kRegression) return std::abs(out[0] - static_cast<Real>(seq.label));
  const auto label = static_cast<std::size_t>(seq.label);
  if (seq.label < 0 || seq.label != std::floor(seq.label) || label >= out.size()) {
    throw DomainError("label is not a class index");
  }
  const Real m = *std::max_element(out.begin(), out.end());
  Real s = 0;
  for (Real z : out) s += std::exp(z - m);
  return m + std::log(s) - out[label];
}

template double reference_loss<double>(const MfnConfig&, const MfnParams&, const MultiViewSequence&);
template long double reference_loss<long double>(const MfnConfig&, const MfnParams&, const MultiViewSequence&);

}  // namespace mfn
