// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfn/data.hpp"
#include "mfn/metrics.hpp"
#include "mfn/model.hpp"

namespace mfn {

enum class OptimizerKind : std::uint8_t { kAdam, kSgd };

struct TrainConfig {
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double momentum = 0.0;  // sgd only
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  double clip_norm = 5.0;  // 0 disables clipping
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // validation / evaluation fan-out only

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_metric = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based; 0 before any epoch
  std::string metric_name;
  double wall_clock_seconds = 0.0;
};

struct TrainResult {
  MfnParams best_params;
  TrainHistory history;
};

/// A named view of tensors, as produced by MfnParams::tensors().
using NamedTensors = std::vector<std::pair<std::string, Tensor*>>;
using ConstNamedTensors = std::vector<std::pair<std::string, const Tensor*>>;

struct OptimizerState {
  std::vector<Tensor> first_moment;   // adam m / sgd velocity
  std::vector<Tensor> second_moment;  // adam v
  std::size_t steps = 0;
};

/// Global L2 norm over all gradient entries.
double global_norm(const ConstNamedTensors& grads);

/// Clips `grads` in place to global norm `max_norm` (no-op when max_norm <= 0
/// or the norm is already within bounds). Returns the norm before clipping.
double clip_global_norm(const NamedTensors& grads, double max_norm);

/// One update. Gradients are clipped first. `grads` must carry the same names
/// and shapes as `params`, in the same order; otherwise SchemaError.
/// Adam uses bias-corrected moments.
void optimizer_step(const NamedTensors& params, const NamedTensors& grads, OptimizerState& state,
                    const TrainConfig& cfg);

/// Loss and gradient of one sequence. Gradients are added into `grads`
/// (which must be zeros_like(params) or a running sum). Reuses `tape`.
double accumulate_gradients(Tape& tape, const MfnConfig& config, const MfnParams& params,
                            const MultiViewSequence& seq, MfnParams& grads);

/// Head outputs (regression scalar or class probabilities) in dataset order.
/// `threads` > 1 splits the work; the result is identical to a serial run.
std::vector<Tensor> predict_all(const MfnConfig& config, const MfnParams& params, const Dataset& data,
                                std::size_t threads = 1);

/// Mean loss over `data`, computed with the same thread contract.
double mean_loss(const MfnConfig& config, const MfnParams& params, const Dataset& data, std::size_t threads = 1);

/// Standard metric set for the task: regression -> MAE, r, BA, F1, MA(7);
/// classification -> MA(k) plus binary or weighted F1. Also records "loss".
EvalReport evaluate(const MfnConfig& config, const MfnParams& params, const Dataset& data, std::size_t threads = 1);

/// Mini-batch training with validation-based model selection.
///
/// Each epoch shuffles the training set with a stream derived from
/// (cfg.seed, epoch), averages gradients over batches of cfg.batch_size
/// sequences and takes one optimizer step per batch. The parameters with the
/// lowest validation loss are returned; training stops once `patience`
/// epochs pass without a strict improvement.
TrainResult train(const MfnConfig& config, MfnParams params, const Dataset& train_set, const Dataset& valid_set,
                  const TrainConfig& cfg);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries = 0;
  /// |tape loss - reference loss| at the unperturbed parameters.
  double loss_gap = 0.0;
};

/// Relative error |a - n| / max(1e-8, |a| + |n|).
double relative_error(double analytic, double numeric);

/// Compares the tape gradient of loss(head(mfn_forward(seq))) against central
/// finite differences with step `eps`, for every parameter entry. The
/// perturbed losses come from reference_loss<long double>, so rounding in the
/// difference quotient stays far below the tolerance even for gradients near
/// the 1e-8 floor.
GradCheckResult grad_check(const MfnConfig& config, const MfnParams& params, const MultiViewSequence& seq,
                           double eps = 1e-5);

}  // namespace mfn
