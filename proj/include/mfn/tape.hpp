// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mfn/tensor.hpp"

namespace mfn {

enum class Op : std::uint8_t {
  kConstant,
  kParameter,
  kMatVec,
  kAffine,
  kAdd,
  kSub,
  kHadamard,
  kSigmoid,
  kTanh,
  kRelu,
  kSoftmax,
  kConcat,
  kSum,
  kLogSumExp,
  kCrossEntropy,
  kAbsError,
};

std::string_view op_name(Op op);

enum class Activation : std::uint8_t { kIdentity, kSigmoid, kTanh, kRelu, kSoftmax };

std::string_view activation_name(Activation a);
/// Inverse of activation_name; throws ConfigError for unknown names.
Activation parse_activation(std::string_view name);

/// Handle to a node recorded on a Tape. Only meaningful for the tape that
/// produced it and only until that tape is cleared.
struct Var {
  static constexpr std::uint32_t kNone = UINT32_MAX;
  std::uint32_t index = kNone;
  bool valid() const { return index != kNone; }
};

/// Append-only record of a computation, with exact reverse-mode gradients.
///
/// Nodes are stored in recording order, so inputs always precede their
/// consumers. Parameters are recorded by reference: the Tensor passed to
/// parameter() must outlive the tape (or the next clear()). clear() keeps all
/// node buffers allocated, so a tape reused across sequences of the same
/// shape performs no allocations after the first one.
///
/// Every forward op rejects non-finite results with NumericError. A tape is
/// single-threaded; distinct tapes are independent.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  /// Leaf without gradient (inputs, fixed states).
  Var constant(const Tensor& value);
  Var constant(std::span<const double> values);
  Var zeros(std::size_t n);
  /// Leaf with gradient; views `value` without copying.
  Var parameter(const Tensor& value);

  Var matvec(Var w, Var x);
  /// sum_k weights[k] * inputs[k] + bias. `bias` may be an invalid Var.
  Var affine(std::span<const Var> weights, std::span<const Var> inputs, Var bias);
  Var affine(std::initializer_list<Var> weights, std::initializer_list<Var> inputs, Var bias);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var softmax(Var a);
  /// Applies `kind`; identity returns `a` unchanged.
  Var activate(Var a, Activation kind);
  Var concat(std::span<const Var> parts);
  Var concat(std::initializer_list<Var> parts);
  Var sum(Var a);
  Var log_sum_exp(Var a);
  /// -log softmax(logits)[target], computed as log_sum_exp(logits) - logits[target].
  Var cross_entropy(Var logits, std::size_t target);
  /// |pred - target| for a scalar prediction.
  Var abs_error(Var pred, double target);

  /// Reverse sweep from a scalar node. Seals the tape: further recording or
  /// a second backward throws StateError until clear().
  void backward(Var loss);

  std::span<const double> value(Var v) const;
  double scalar(Var v) const;
  Tensor value_tensor(Var v) const;
  /// Gradient of the last backward's loss w.r.t. `v`. Empty for nodes that
  /// do not depend on any parameter.
  std::span<const double> grad(Var v) const;
  std::span<const std::size_t> shape(Var v) const;
  std::size_t size(Var v) const;

  std::size_t node_count() const { return count_; }
  Op op(Var v) const;
  /// Inputs of a node, used by tests that check topological order.
  std::span<const std::uint32_t> inputs(Var v) const;
  bool sealed() const { return sealed_; }

  void clear();

 private:
  struct Node {
    Op op = Op::kConstant;
    bool needs_grad = false;
    std::size_t shape[2] = {0, 0};
    std::uint8_t rank = 1;
    std::size_t aux = 0;
    double aux_value = 0.0;
    const double* external = nullptr;
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<std::uint32_t> inputs;
  };

  Node& push(Op op, std::size_t n);
  Node& node(Var v);
  const Node& node(Var v) const;
  const double* data(const Node& n) const { return n.external ? n.external : n.value.data(); }
  std::size_t length(const Node& n) const { return n.rank == 1 ? n.shape[0] : n.shape[0] * n.shape[1]; }
  void check_open() const;
  void check_finite(const Node& n) const;
  void backward_node(std::size_t index);

  std::vector<Node> nodes_;
  std::size_t count_ = 0;
  bool sealed_ = false;
};

namespace testing {

/// While alive, the backward rule of `op` on the current thread scales the
/// gradient it propagates to its inputs by `scale`. Exists so gradient
/// checkers can be shown to catch a broken rule.
class ScopedBackwardFault {
 public:
  ScopedBackwardFault(Op op, double scale);
  ~ScopedBackwardFault();
  ScopedBackwardFault(const ScopedBackwardFault&) = delete;
  ScopedBackwardFault& operator=(const ScopedBackwardFault&) = delete;

 private:
  std::optional<std::pair<Op, double>> previous_;
};

}  // namespace testing

// Value-level wrappers. Each records a throwaway tape, so they share the
// exact kernels used during training.
Tensor matvec(const Tensor& w, const Tensor& x);
Tensor activation(const Tensor& v, Activation kind);
Tensor softmax(const Tensor& v);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor concat(std::span<const Tensor> parts);
double log_sum_exp(const Tensor& v);

}  // namespace mfn
