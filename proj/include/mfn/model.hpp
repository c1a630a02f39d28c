// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfn/data.hpp"
#include "mfn/dman.hpp"
#include "mfn/gated_memory.hpp"
#include "mfn/lstm.hpp"
#include "mfn/mlp.hpp"
#include "mfn/tape.hpp"

namespace mfn {

struct ViewSpec {
  std::string name;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;

  bool operator==(const ViewSpec&) const = default;
};

enum class VariantKind : std::uint8_t { kFull, kNoDelta, kNoMemory, kSingleView };

/// Which parts of the network are active. Names: "full", "no_delta",
/// "no_mem", "single_view:<view>".
struct Variant {
  VariantKind kind = VariantKind::kFull;
  std::string view;  // only for kSingleView

  static Variant full() { return {}; }
  static Variant no_delta() { return {VariantKind::kNoDelta, {}}; }
  static Variant no_memory() { return {VariantKind::kNoMemory, {}}; }
  static Variant single_view(std::string v) { return {VariantKind::kSingleView, std::move(v)}; }
  static Variant parse(const std::string& name);

  std::string name() const;
  bool has_memory() const { return kind == VariantKind::kFull || kind == VariantKind::kNoDelta; }
  bool operator==(const Variant&) const = default;
};

enum class TaskKind : std::uint8_t { kRegression, kClassification };

struct Task {
  TaskKind kind = TaskKind::kRegression;
  std::size_t classes = 0;  // classification only, >= 2

  static Task regression() { return {}; }
  static Task classification(std::size_t k) { return {TaskKind::kClassification, k}; }
  std::size_t output_dim() const { return kind == TaskKind::kRegression ? 1 : classes; }
  bool operator==(const Task&) const = default;
};

struct MfnConfig {
  std::vector<ViewSpec> views;
  std::size_t memory_dim = 64;
  /// Hidden widths of the attention network (default: one layer of 4 * d_c).
  std::vector<std::size_t> attention_hidden;
  Activation attention_hidden_activation = Activation::kRelu;
  /// Hidden widths of the proposal and gate networks (default: one layer of 2 * d_mem).
  std::vector<std::size_t> memory_hidden;
  Activation memory_hidden_activation = Activation::kRelu;
  Variant variant;
  Task task;

  /// Fills the hidden widths with the defaults above.
  static MfnConfig make(std::vector<ViewSpec> views, std::size_t memory_dim, Task task,
                        Variant variant = Variant::full());
  /// Language / visual / acoustic with input widths 300, 35, 74.
  static MfnConfig default_config();
  /// Three views, d_x = 3, d_c = 4, d_mem = 5: sized for gradient checks.
  static MfnConfig tiny_config();

  /// Sum of LSTM hidden sizes over all configured views.
  std::size_t total_hidden() const;
  /// Views whose LSTM runs under the current variant, in config order.
  std::vector<ViewSpec> active_views() const;
  /// 2 * d_c for the full model, d_c without the delta context.
  std::size_t attention_dim() const;
  std::size_t feature_dim() const;
  const ViewSpec* find_view(const std::string& name) const;
  /// Throws ConfigError on duplicate names, zero dimensions or an unknown
  /// single-view name.
  void validate() const;
  MfnConfig with_variant(Variant v) const;

  bool operator==(const MfnConfig&) const = default;
};

struct PredictionHead {
  Tensor weight;  // [output_dim x feature_dim]
  Tensor bias;    // [output_dim]
};

/// Every trainable tensor. Absent parts (attention/memory) follow the
/// variant; `lstms` holds the active views in config order.
struct MfnParams {
  std::vector<LstmParams> lstms;
  std::optional<MlpParams> attention;
  std::optional<MemoryNets> memory;
  PredictionHead head;

  /// Stable, named enumeration of every tensor (checkpoints, optimizers,
  /// gradient checks).
  std::vector<std::pair<std::string, Tensor*>> tensors(const MfnConfig& config);
  std::vector<std::pair<std::string, const Tensor*>> tensors(const MfnConfig& config) const;
  std::size_t parameter_count() const;

  bool operator==(const MfnParams& other) const;
};

struct ParamCount {
  std::size_t lstm = 0;
  std::size_t attention = 0;
  std::size_t memory = 0;
  std::size_t head = 0;
  std::size_t total() const { return lstm + attention + memory + head; }
};

/// Closed-form parameter count of the variant described by `config`.
ParamCount param_count(const MfnConfig& config);

MfnParams zero_params(const MfnConfig& config);

/// Deterministic initialization: LSTMs as in init_lstm, Glorot-uniform MLP
/// and head weights, zero biases (forget biases 1).
MfnParams init_params(const MfnConfig& config, std::uint64_t seed);

/// Same-shaped zero tensors; used as a gradient accumulator.
MfnParams zeros_like(const MfnParams& params);

struct StepTrace {
  std::vector<LstmState> lstm;  // active views, config order
  AttentionOutput attention;    // empty when the variant has no memory
  MemoryState memory;           // empty when the variant has no memory
};

using ForwardTrace = std::vector<StepTrace>;

/// MFN parameters recorded on a tape.
struct MfnVars {
  std::vector<LstmVars> lstms;
  std::optional<MlpVars> attention;
  std::optional<MemoryNetVars> memory;
  Var head_weight;
  Var head_bias;
};

MfnVars bind(Tape& tape, const MfnConfig& config, const MfnParams& params);

/// Parameter nodes in MfnParams::tensors() order.
std::vector<Var> parameter_vars(const MfnVars& vars);

/// Checks that `seq` carries exactly the configured views with the configured
/// widths and one shared length. Throws SchemaError / DimensionError /
/// AlignmentError.
void check_sequence(const MfnConfig& config, const MultiViewSequence& seq);

/// Runs the recurrence for the configured variant and returns the feature
/// node: concat(h_1^T, ..., h_N^T, u^T) for full/no_delta, concat of the h's
/// for no_mem and h_v^T for single_view. The memory at t = 0 is zero for
/// every LSTM, so at t = 1 the previous memories fed to attention are zero.
Var mfn_forward(Tape& tape, const MfnConfig& config, const MfnVars& vars, const MultiViewSequence& seq,
                ForwardTrace* trace = nullptr);

/// Head output before any softmax: a scalar for regression, logits otherwise.
Var head_output(Tape& tape, const MfnVars& vars, Var features);

/// Training loss on a tape: L1 for regression, cross-entropy for classification.
Var loss(Tape& tape, const Task& task, Var head_out, double label);

struct ForwardResult {
  Tensor features;
  ForwardTrace trace;
};

ForwardResult mfn_forward(const MfnParams& params, const MfnConfig& config, const MultiViewSequence& seq,
                          bool capture_trace = true);

/// Regression: the affine scalar. Classification: softmax probabilities.
Tensor predict(const PredictionHead& head, const Tensor& features, const Task& task);

/// Loss value of a single head output; cross-entropy uses log-sum-exp.
double loss_value(const Task& task, const Tensor& head_out, double label);

/// Reusable single-thread evaluator: keeps one tape alive across calls.
class Predictor {
 public:
  Predictor(const MfnConfig& config, const MfnParams& params) : config_(config), params_(params) {}
  /// Regression scalar or class probabilities.
  Tensor predict(const MultiViewSequence& seq);
  double loss(const MultiViewSequence& seq);

 private:
  const MfnConfig& config_;
  const MfnParams& params_;
  Tape tape_;
};

}  // namespace mfn
