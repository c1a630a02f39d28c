// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfn/error.hpp"

namespace mfn {

namespace {

thread_local std::optional<std::pair<Op, double>> g_fault;

double fault_scale(Op op) { return (g_fault && g_fault->first == op) ? g_fault->second : 1.0; }

// Four partial sums; fixed association order keeps results reproducible.
inline double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double lse(const double* v, std::size_t n) {
  const double m = *std::max_element(v, v + n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

}  // namespace

std::string_view op_name(Op op) {
  switch (op) {
    case Op::kConstant: return "constant";
    case Op::kParameter: return "parameter";
    case Op::kMatVec: return "matvec";
    case Op::kAffine: return "affine";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kHadamard: return "hadamard";
    case Op::kSigmoid: return "sigmoid";
    case Op::kTanh: return "tanh";
    case Op::kRelu: return "relu";
    case Op::kSoftmax: return "softmax";
    case Op::kConcat: return "concat";
    case Op::kSum: return "sum";
    case Op::kLogSumExp: return "log_sum_exp";
    case Op::kCrossEntropy: return "cross_entropy";
    case Op::kAbsError: return "abs_error";
  }
  return "?";
}

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kSoftmax: return "softmax";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  for (auto a : {Activation::kIdentity, Activation::kSigmoid, Activation::kTanh, Activation::kRelu,
                 Activation::kSoftmax}) {
    if (activation_name(a) == name) return a;
  }
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Recording

Tape::Node& Tape::push(Op op, std::size_t n) {
  check_open();
  if (count_ == nodes_.size()) nodes_.emplace_back();
  Node& out = nodes_[count_++];
  out.op = op;
  out.needs_grad = false;
  out.shape[0] = n;
  out.shape[1] = 0;
  out.rank = 1;
  out.aux = 0;
  out.aux_value = 0.0;
  out.external = nullptr;
  out.value.resize(n);
  out.inputs.clear();
  return out;
}

Tape::Node& Tape::node(Var v) {
  if (v.index >= count_) throw StateError("Var does not belong to the live part of this tape");
  return nodes_[v.index];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.index >= count_) throw StateError("Var does not belong to the live part of this tape");
  return nodes_[v.index];
}

void Tape::check_open() const {
  if (sealed_) throw StateError("tape is sealed after backward; clear() it before recording again");
}

void Tape::check_finite(const Node& n) const {
  const double* d = data(n);
  const std::size_t len = length(n);
  for (std::size_t i = 0; i < len; ++i) {
    if (!std::isfinite(d[i])) {
      throw NumericError("non-finite value produced by " + std::string(op_name(n.op)) + " at element " +
                         std::to_string(i));
    }
  }
}

Var Tape::constant(const Tensor& value) {
  if (value.rank() == 0 || value.rank() > 2) {
    throw DimensionError("tape supports rank 1 and 2 tensors, got " + shape_string(value.shape));
  }
  Node& out = push(Op::kConstant, value.size());
  out.rank = static_cast<std::uint8_t>(value.rank());
  out.shape[0] = value.shape[0];
  out.shape[1] = value.rank() == 2 ? value.shape[1] : 0;
  std::copy(value.data.begin(), value.data.end(), out.value.begin());
  check_finite(out);
  return Var{static_cast<std::uint32_t>(count_ - 1)};
}

Var Tape::constant(std::span<const double> values) {
  Node& out = push(Op::kConstant, values.size());
  std::copy(values.begin(), values.end(), out.value.begin());
  check_finite(out);
  return Var{static_cast<std::uint32_t>(count_ - 1)};
}

Var Tape::zeros(std::size_t n) {
  Node& out = push(Op::kConstant, n);
  std::fill(out.value.begin(), out.value.end(), 0.0);
  return Var{static_cast<std::uint32_t>(count_ - 1)};
}

Var Tape::parameter(const Tensor& value) {
  if (value.rank() == 0 || value.rank() > 2) {
    throw DimensionError("tape supports rank 1 and 2 tensors, got " + shape_string(value.shape));
  }
  if (value.size() != shape_product(value.shape)) {
    throw DimensionError("parameter data length does not match shape " + shape_string(value.shape));
  }
  Node& out = push(Op::kParameter, 0);
  out.rank = static_cast<std::uint8_t>(value.rank());
  out.shape[0] = value.shape[0];
  out.shape[1] = value.rank() == 2 ? value.shape[1] : 0;
  out.external = value.data.data();
  out.needs_grad = true;
  check_finite(out);
  return Var{static_cast<std::uint32_t>(count_ - 1)};
}

Var Tape::matvec(Var w, Var x) {
  const Var ws[] = {w};
  const Var xs[] = {x};
  return affine(ws, xs, Var{});
}

Var Tape::affine(std::initializer_list<Var> weights, std::initializer_list<Var> inputs, Var bias) {
  return affine(std::span<const Var>(weights.begin(), weights.size()),
                std::span<const Var>(inputs.begin(), inputs.size()), bias);
}

Var Tape::affine(std::span<const Var> weights, std::span<const Var> inputs, Var bias) {
  if (weights.empty() || weights.size() != inputs.size()) {
    throw DimensionError("affine: need equally many weights and inputs (got " + std::to_string(weights.size()) +
                         " and " + std::to_string(inputs.size()) + ")");
  }
  const std::size_t m = node(weights[0]).shape[0];
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const Node& w = node(weights[k]);
    const Node& x = node(inputs[k]);
    const std::size_t xs = length(x);
    if (w.rank != 2 || x.rank != 1 || w.shape[1] != xs || w.shape[0] != m) {
      const std::size_t wshape[] = {w.shape[0], w.shape[1]};
      const std::size_t xshape[] = {xs};
      throw DimensionError("matvec: cannot multiply " + shape_string(std::span(wshape, w.rank)) + " by " +
                           shape_string(xshape));
    }
  }
  if (bias.valid() && (node(bias).rank != 1 || length(node(bias)) != m)) {
    const std::size_t bshape[] = {length(node(bias))};
    const std::size_t want[] = {m};
    throw DimensionError("affine: bias " + shape_string(bshape) + " does not match output " + shape_string(want));
  }
  Node& out = push(weights.size() == 1 && !bias.valid() ? Op::kMatVec : Op::kAffine, m);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    out.inputs.push_back(weights[k].index);
    out.inputs.push_back(inputs[k].index);
  }
  out.aux = bias.valid() ? 1 : 0;
  if (bias.valid()) out.inputs.push_back(bias.index);

  double* y = out.value.data();
  if (bias.valid()) {
    const double* b = data(nodes_[bias.index]);
    std::copy(b, b + m, y);
  } else {
    std::fill(y, y + m, 0.0);
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const Node& w = nodes_[weights[k].index];
    const Node& x = nodes_[inputs[k].index];
    const std::size_t n = w.shape[1];
    const double* wd = data(w);
    const double* xd = data(x);
    for (std::size_t i = 0; i < m; ++i) y[i] += dot(wd + i * n, xd, n);
    out.needs_grad |= w.needs_grad || x.needs_grad;
  }
  if (bias.valid()) out.needs_grad |= nodes_[bias.index].needs_grad;
  check_finite(out);
  return Var{static_cast<std::uint32_t>(count_ - 1)};
}

namespace {

template <typename F>
void binary_apply(const double* a, const double* b, double* out, std::size_t n, F f) {
  for (std::size_t i = 0; i < n; ++i) out[i] = f(a[i], b[i]);
}

}  // namespace

#define MFN_BINARY_OP(NAME, OPKIND, EXPR)                                                                   \
  Var Tape::NAME(Var a, Var b) {                                                                            \
    const std::size_t na = length(node(a)), nb = length(node(b));                                           \
    if (na != nb || node(a).rank != 1 || node(b).rank != 1) {                                               \
      const std::size_t sa[] = {na}, sb[] = {nb};                                                           \
      throw DimensionError(std::string(#NAME ": length mismatch ") + shape_string(sa) + " vs " +           \
                           shape_string(sb));                                                               \
    }                                                                                                       \
    Node& out = push(OPKIND, na);                                                                           \
    out.inputs = {a.index, b.index};                                                                        \
    const Node& x = nodes_[a.index];                                                                        \
    const Node& y = nodes_[b.index];                                                                        \
    out.needs_grad = x.needs_grad || y.needs_grad;                                                          \
    binary_apply(data(x), data(y), out.value.data(), na, [](double p, double q) { return EXPR; });          \
    check_finite(out);                                                                                      \
    return Var{static_cast<std::uint32_t>(count_ - 1)};                                                     \
  }

MFN_BINARY_OP(add, Op::kAdd, p + q)
MFN_BINARY_OP(sub, Op::kSub, p - q)
MFN_BINARY_OP(hadamard, Op::kHadamard, p* q)

#undef MFN_BINARY_OP

#define MFN_UNARY_OP(NAME, OPKIND, EXPR)                        \
  Var Tape::NAME(Var a) {                                       \
    const std::size_t n = length(node(a));                      \
    Node& out = push(OPKIND, n);                                \
    out.inputs = {a.index};                                     \
    const Node& in = nodes_[a.index];                           \
    out.needs_grad = in.needs_grad;                             \
    out.rank = in.rank;                                         \
    out.shape[0] = in.shape[0];                                 \
    out.shape[1] = in.shape[1];                                 \
    const double* x = data(in);                                 \
    double* y = out.value.data();                               \
    for (std::size_t i = 0; i < n; ++i) {                       \
      const double v = x[i];                                    \
      y[i] = EXPR;                                              \
    }                                                           \
    check_finite(out);                                          \
    return Var{static_cast<std::uint32_t>(count_ - 1)};         \
  }

MFN_UNARY_OP(sigmoid, Op::kSigmoid, stable_sigmoid(v))
MFN_UNARY_OP(tanh, Op::kTanh, std::tanh(v))
MFN_UNARY_OP(relu, Op::kRelu, v > 0.0 ? v : 0.0)

#undef MFN_UNARY_OP

Var Tape::softmax(Var a) {
  const std::size_t n = length(node(a));
  if (n == 0) throw DomainError("softmax of an empty vector");
  Node& out = push(Op::kSoftmax, n);
  out.inputs = {a.index};
  const Node& in = nodes_[a.index];
  out.needs_grad = in.needs_grad;
  const double* x = data(in);
  double* y = out.value.data();
  const double m = *std::max_element(x, x + n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::exp(x[i] - m);
    s += y[i];
  }
  const double inv = 1.0 / s;
  for (std::size_t i = 0; i < n; ++i) y[i] *= inv;
  check_finite(out);
  return Var{static_cast<std::uint32_t>(count_ - 1)};
}

Var Tape::activate(Var a, Activation kind) {
  switch (kind) {
    case Activation::kIdentity: return a;
    case Activation::kSigmoid: return sigmoid(a);
    case Activation::kTanh: return tanh(a);
    case Activation::kRelu: return relu(a);
    case Activation::kSoftmax: return softmax(a);
  }
  return a;
}

Var Tape::concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw DomainError("concat of an empty list");
  std::size_t n = 0;
  for (Var p : parts) {
    if (node(p).rank != 1) throw DimensionError("concat expects vectors");
    n += length(node(p));
  }
  Node& out = push(Op::kConcat, n);
  double* y = out.value.data();
  for (Var p : parts) {
    out.inputs.push_back(p.index);
    const Node& in = nodes_[p.index];
    out.needs_grad |= in.needs_grad;
    const double* x = data(in);
    y = std::copy(x, x + length(in), y);
  }
  return Var{static_cast<std::uint32_t>(count_ - 1)};
}

Var Tape::sum(Var a) {
  const std::size_t n = length(node(a));
  Node& out = push(Op::kSum, 1);
  out.inputs = {a.index};
  const Node& in = nodes_[a.index];
  out.needs_grad = in.needs_grad;
  const double* x = data(in);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  out.value[0] = s;
  check_finite(out);
  return Var{static_cast<std::uint32_t>(count_ - 1)};
}

Var Tape::log_sum_exp(Var a) {
  const std::size_t n = length(node(a));
  if (n == 0) throw DomainError("log_sum_exp of an empty vector");
  Node& out = push(Op::kLogSumExp, 1);
  out.inputs = {a.index};
  const Node& in = nodes_[a.index];
  out.needs_grad = in.needs_grad;
  out.value[0] = lse(data(in), n);
  check_finite(out);
  return Var{static_cast<std::uint32_t>(count_ - 1)};
}

Var Tape::cross_entropy(Var logits, std::size_t target) {
  const std::size_t n = length(node(logits));
  if (target >= n) {
    throw DomainError("class " + std::to_string(target) + " out of range for " + std::to_string(n) + " classes");
  }
  Node& out = push(Op::kCrossEntropy, 1);
  out.inputs = {logits.index};
  out.aux = target;
  const Node& in = nodes_[logits.index];
  out.needs_grad = in.needs_grad;
  const double* z = data(in);
  out.value[0] = lse(z, n) - z[target];
  check_finite(out);
  return Var{static_cast<std::uint32_t>(count_ - 1)};
}

Var Tape::abs_error(Var pred, double target) {
  if (length(node(pred)) != 1) throw DimensionError("abs_error expects a scalar prediction");
  if (!std::isfinite(target)) throw NumericError("abs_error: non-finite target");
  Node& out = push(Op::kAbsError, 1);
  out.inputs = {pred.index};
  out.aux_value = target;
  const Node& in = nodes_[pred.index];
  out.needs_grad = in.needs_grad;
  out.value[0] = std::abs(data(in)[0] - target);
  check_finite(out);
  return Var{static_cast<std::uint32_t>(count_ - 1)};
}

// ---------------------------------------------------------------------------
// Reverse sweep

void Tape::backward(Var loss) {
  if (sealed_) throw StateError("backward already ran on this tape; record a new graph first");
  const Node& l = node(loss);
  if (length(l) != 1) {
    throw DomainError("backward needs a scalar loss, got " + std::to_string(length(l)) + " elements");
  }
  for (std::size_t i = 0; i <= loss.index; ++i) {
    Node& n = nodes_[i];
    if (n.needs_grad) {
      n.grad.assign(length(n), 0.0);
    } else {
      n.grad.clear();
    }
  }
  for (std::size_t i = loss.index + 1; i < count_; ++i) nodes_[i].grad.clear();
  sealed_ = true;
  if (!l.needs_grad) return;
  nodes_[loss.index].grad[0] = 1.0;
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    if (nodes_[i].needs_grad) backward_node(i);
  }
}

void Tape::backward_node(std::size_t index) {
  Node& out = nodes_[index];
  const std::size_t n = length(out);
  const double* g = out.grad.data();
  const double scale = fault_scale(out.op);
  auto input = [&](std::size_t k) -> Node& { return nodes_[out.inputs[k]]; };

  switch (out.op) {
    case Op::kConstant:
    case Op::kParameter:
      return;
    case Op::kMatVec:
    case Op::kAffine: {
      const std::size_t terms = (out.inputs.size() - out.aux) / 2;
      for (std::size_t k = 0; k < terms; ++k) {
        Node& w = input(2 * k);
        Node& x = input(2 * k + 1);
        const std::size_t cols = w.shape[1];
        const double* wd = data(w);
        const double* xd = data(x);
        if (w.needs_grad) {
          double* gw = w.grad.data();
          for (std::size_t i = 0; i < n; ++i) {
            const double gi = g[i] * scale;
            if (gi == 0.0) continue;
            double* row = gw + i * cols;
            for (std::size_t j = 0; j < cols; ++j) row[j] += gi * xd[j];
          }
        }
        if (x.needs_grad) {
          double* gx = x.grad.data();
          for (std::size_t i = 0; i < n; ++i) {
            const double gi = g[i] * scale;
            if (gi == 0.0) continue;
            const double* row = wd + i * cols;
            for (std::size_t j = 0; j < cols; ++j) gx[j] += gi * row[j];
          }
        }
      }
      if (out.aux) {
        Node& b = nodes_[out.inputs.back()];
        if (b.needs_grad) {
          for (std::size_t i = 0; i < n; ++i) b.grad[i] += g[i] * scale;
        }
      }
      return;
    }
    case Op::kAdd:
    case Op::kSub: {
      Node& a = input(0);
      Node& b = input(1);
      const double sign = out.op == Op::kSub ? -1.0 : 1.0;
      if (a.needs_grad)
        for (std::size_t i = 0; i < n; ++i) a.grad[i] += g[i] * scale;
      if (b.needs_grad)
        for (std::size_t i = 0; i < n; ++i) b.grad[i] += sign * g[i] * scale;
      return;
    }
    case Op::kHadamard: {
      Node& a = input(0);
      Node& b = input(1);
      const double* ad = data(a);
      const double* bd = data(b);
      // Same node on both sides (x*x) accumulates twice, as it should.
      if (a.needs_grad)
        for (std::size_t i = 0; i < n; ++i) a.grad[i] += g[i] * bd[i] * scale;
      if (b.needs_grad)
        for (std::size_t i = 0; i < n; ++i) b.grad[i] += g[i] * ad[i] * scale;
      return;
    }
    case Op::kSigmoid: {
      Node& a = input(0);
      const double* y = out.value.data();
      for (std::size_t i = 0; i < n; ++i) a.grad[i] += g[i] * y[i] * (1.0 - y[i]) * scale;
      return;
    }
    case Op::kTanh: {
      Node& a = input(0);
      const double* y = out.value.data();
      for (std::size_t i = 0; i < n; ++i) a.grad[i] += g[i] * (1.0 - y[i] * y[i]) * scale;
      return;
    }
    case Op::kRelu: {
      Node& a = input(0);
      const double* x = data(a);
      for (std::size_t i = 0; i < n; ++i)
        if (x[i] > 0.0) a.grad[i] += g[i] * scale;
      return;
    }
    case Op::kSoftmax: {
      Node& a = input(0);
      const double* y = out.value.data();
      const double gy = dot(g, y, n);
      for (std::size_t i = 0; i < n; ++i) a.grad[i] += y[i] * (g[i] - gy) * scale;
      return;
    }
    case Op::kConcat: {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < out.inputs.size(); ++k) {
        Node& a = input(k);
        const std::size_t len = length(a);
        if (a.needs_grad)
          for (std::size_t i = 0; i < len; ++i) a.grad[i] += g[offset + i] * scale;
        offset += len;
      }
      return;
    }
    case Op::kSum: {
      Node& a = input(0);
      for (double& v : a.grad) v += g[0] * scale;
      return;
    }
    case Op::kLogSumExp:
    case Op::kCrossEntropy: {
      Node& a = input(0);
      const std::size_t len = length(a);
      const double* z = data(a);
      const double m = *std::max_element(z, z + len);
      double s = 0.0;
      for (std::size_t i = 0; i < len; ++i) s += std::exp(z[i] - m);
      for (std::size_t i = 0; i < len; ++i) a.grad[i] += g[0] * std::exp(z[i] - m) / s * scale;
      if (out.op == Op::kCrossEntropy) a.grad[out.aux] -= g[0] * scale;
      return;
    }
    case Op::kAbsError: {
      Node& a = input(0);
      const double diff = data(a)[0] - out.aux_value;
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      a.grad[0] += g[0] * sign * scale;
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Accessors

std::span<const double> Tape::value(Var v) const {
  const Node& n = node(v);
  return {data(n), length(n)};
}

double Tape::scalar(Var v) const {
  const auto s = value(v);
  if (s.size() != 1) throw DimensionError("scalar(): node has " + std::to_string(s.size()) + " elements");
  return s[0];
}

Tensor Tape::value_tensor(Var v) const {
  const Node& n = node(v);
  Tensor t;
  t.shape.assign(n.shape, n.shape + n.rank);
  const double* d = data(n);
  t.data.assign(d, d + length(n));
  return t;
}

std::span<const double> Tape::grad(Var v) const {
  const Node& n = node(v);
  return n.grad;
}

std::span<const std::size_t> Tape::shape(Var v) const {
  const Node& n = node(v);
  return {n.shape, n.rank};
}

std::size_t Tape::size(Var v) const { return length(node(v)); }

Op Tape::op(Var v) const { return node(v).op; }

std::span<const std::uint32_t> Tape::inputs(Var v) const { return node(v).inputs; }

void Tape::clear() {
  count_ = 0;
  sealed_ = false;
}

// ---------------------------------------------------------------------------

namespace testing {

ScopedBackwardFault::ScopedBackwardFault(Op op, double scale) : previous_(g_fault) {
  g_fault = std::make_pair(op, scale);
}

ScopedBackwardFault::~ScopedBackwardFault() { g_fault = previous_; }

}  // namespace testing

Tensor matvec(const Tensor& w, const Tensor& x) {
  Tape tape;
  return tape.value_tensor(tape.matvec(tape.constant(w), tape.constant(x)));
}

Tensor activation(const Tensor& v, Activation kind) {
  Tape tape;
  return tape.value_tensor(tape.activate(tape.constant(v), kind));
}

Tensor softmax(const Tensor& v) {
  Tape tape;
  return tape.value_tensor(tape.softmax(tape.constant(v)));
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  Tape tape;
  return tape.value_tensor(tape.hadamard(tape.constant(a), tape.constant(b)));
}

Tensor concat(std::span<const Tensor> parts) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(parts.size());
  for (const Tensor& p : parts) vars.push_back(tape.constant(p));
  return tape.value_tensor(tape.concat(vars));
}

double log_sum_exp(const Tensor& v) {
  Tape tape;
  return tape.scalar(tape.log_sum_exp(tape.constant(v)));
}

}  // namespace mfn
