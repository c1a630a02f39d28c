// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "mfn/error.hpp"
#include "mfn/random.hpp"
#include "mfn/reference.hpp"

namespace mfn {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (patience == 0) throw ConfigError("patience must be >= 1");
  if (!(clip_norm >= 0.0)) throw ConfigError("clip_norm must be >= 0");
  if (threads == 0) throw ConfigError("threads must be >= 1");
}

// ---------------------------------------------------------------------------
// Optimizer

double global_norm(const ConstNamedTensors& grads) {
  double s = 0.0;
  for (const auto& [_, g] : grads)
    for (double v : g->data) s += v * v;
  return std::sqrt(s);
}

double clip_global_norm(const NamedTensors& grads, double max_norm) {
  ConstNamedTensors view(grads.begin(), grads.end());
  const double norm = global_norm(view);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& [_, g] : grads)
      for (double& v : g->data) v *= scale;
  }
  return norm;
}

void optimizer_step(const NamedTensors& params, const NamedTensors& grads, OptimizerState& state,
                    const TrainConfig& cfg) {
  if (params.size() != grads.size()) {
    throw SchemaError("optimizer: " + std::to_string(params.size()) + " parameters but " +
                      std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].first != grads[k].first || params[k].second->shape != grads[k].second->shape) {
      throw SchemaError("optimizer: gradient '" + grads[k].first + "' " + shape_string(grads[k].second->shape) +
                        " does not match parameter '" + params[k].first + "' " +
                        shape_string(params[k].second->shape));
    }
  }
  if (state.first_moment.empty()) {
    for (const auto& [_, p] : params) {
      state.first_moment.push_back(Tensor::zeros(p->shape));
      if (cfg.optimizer == OptimizerKind::kAdam) state.second_moment.push_back(Tensor::zeros(p->shape));
    }
  }
  if (state.first_moment.size() != params.size()) throw StateError("optimizer state belongs to another model");
  clip_global_norm(grads, cfg.clip_norm);
  ++state.steps;

  if (cfg.optimizer == OptimizerKind::kAdam) {
    const double t = static_cast<double>(state.steps);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
      double* p = params[k].second->data.data();
      const double* g = grads[k].second->data.data();
      double* m = state.first_moment[k].data.data();
      double* v = state.second_moment[k].data.data();
      const std::size_t n = params[k].second->size();
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        p[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      }
    }
  } else {
    for (std::size_t k = 0; k < params.size(); ++k) {
      double* p = params[k].second->data.data();
      const double* g = grads[k].second->data.data();
      double* vel = state.first_moment[k].data.data();
      const std::size_t n = params[k].second->size();
      for (std::size_t i = 0; i < n; ++i) {
        vel[i] = cfg.momentum * vel[i] + g[i];
        p[i] -= cfg.learning_rate * vel[i];
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Gradients and evaluation

double accumulate_gradients(Tape& tape, const MfnConfig& config, const MfnParams& params,
                            const MultiViewSequence& seq, MfnParams& grads) {
  tape.clear();
  const MfnVars vars = bind(tape, config, params);
  const Var out = head_output(tape, vars, mfn_forward(tape, config, vars, seq));
  const Var l = loss(tape, config.task, out, seq.label);
  tape.backward(l);
  const auto nodes = parameter_vars(vars);
  const auto targets = grads.tensors(config);
  if (nodes.size() != targets.size()) throw SchemaError("gradient accumulator does not match the parameters");
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto g = tape.grad(nodes[k]);
    auto& dst = targets[k].second->data;
    if (g.size() != dst.size()) throw SchemaError("gradient accumulator shape mismatch at " + targets[k].first);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  }
  return tape.scalar(l);
}

namespace {

// Runs fn(predictor, index) over [0, n) on `threads` workers, each owning one
// Predictor and a contiguous block of indices.
template <typename Fn>
void parallel_for(const MfnConfig& config, const MfnParams& params, std::size_t n, std::size_t threads, Fn fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    Predictor p(config, params);
    for (std::size_t i = 0; i < n; ++i) fn(p, i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        Predictor p(config, params);
        for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) fn(p, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<Tensor> predict_all(const MfnConfig& config, const MfnParams& params, const Dataset& data,
                                std::size_t threads) {
  std::vector<Tensor> out(data.size());
  parallel_for(config, params, data.size(), threads, [&](Predictor& p, std::size_t i) { out[i] = p.predict(data[i]); });
  return out;
}

double mean_loss(const MfnConfig& config, const MfnParams& params, const Dataset& data, std::size_t threads) {
  if (data.empty()) throw DomainError("mean loss of an empty dataset");
  std::vector<double> losses(data.size());
  parallel_for(config, params, data.size(), threads,
               [&](Predictor& p, std::size_t i) { losses[i] = p.loss(data[i]); });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(data.size());
}

namespace {

int argmax(const Tensor& t) {
  return static_cast<int>(std::max_element(t.data.begin(), t.data.end()) - t.data.begin());
}

}  // namespace

EvalReport evaluate(const MfnConfig& config, const MfnParams& params, const Dataset& data, std::size_t threads) {
  if (data.empty()) throw DomainError("cannot evaluate an empty dataset");
  const auto outputs = predict_all(config, params, data, threads);
  EvalReport report;
  double total_loss = 0.0;
  if (config.task.kind == TaskKind::kRegression) {
    std::vector<double> preds, labels;
    for (std::size_t i = 0; i < data.size(); ++i) {
      preds.push_back(outputs[i][0]);
      labels.push_back(data[i].label);
      total_loss += loss_value(config.task, outputs[i], data[i].label);
    }
    report = regression_report(preds, labels);
  } else {
    std::vector<int> preds, labels;
    for (std::size_t i = 0; i < data.size(); ++i) {
      preds.push_back(argmax(outputs[i]));
      labels.push_back(static_cast<int>(data[i].label));
      // Loss from probabilities: -log p[label].
      total_loss += -std::log(std::max(outputs[i][static_cast<std::size_t>(data[i].label)], 1e-300));
    }
    report = classification_report(preds, labels, config.task.classes);
  }
  report.metrics["loss"] = total_loss / static_cast<double>(data.size());
  return report;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

std::pair<std::string, double> validation_metric(const MfnConfig& config, const MfnParams& params,
                                                 const Dataset& valid, std::size_t threads) {
  const auto outputs = predict_all(config, params, valid, threads);
  if (config.task.kind == TaskKind::kRegression) {
    double s = 0.0;
    for (std::size_t i = 0; i < valid.size(); ++i) s += std::abs(outputs[i][0] - valid[i].label);
    return {"mae", s / static_cast<double>(valid.size())};
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < valid.size(); ++i) correct += argmax(outputs[i]) == static_cast<int>(valid[i].label);
  return {"ma" + std::to_string(config.task.classes), static_cast<double>(correct) / static_cast<double>(valid.size())};
}

}  // namespace

TrainResult train(const MfnConfig& config, MfnParams params, const Dataset& train_set, const Dataset& valid_set,
                  const TrainConfig& cfg) {
  config.validate();
  cfg.validate();
  if (train_set.empty()) throw DomainError("training set is empty");
  if (valid_set.empty()) throw DomainError("validation set is empty");
  for (const auto& seq : train_set) check_sequence(config, seq);
  for (const auto& seq : valid_set) check_sequence(config, seq);

  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  result.best_params = params;
  double best_loss = 0.0;
  std::size_t since_best = 0;

  Tape tape;
  OptimizerState opt;
  MfnParams grads = zeros_like(params);
  std::vector<std::size_t> order(train_set.size());

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      grads = zeros_like(params);
      for (std::size_t i = begin; i < end; ++i) {
        epoch_loss += accumulate_gradients(tape, config, params, train_set[order[i]], grads);
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      const auto g = grads.tensors(config);
      for (const auto& [_, t] : g)
        for (double& v : t->data) v *= inv;
      optimizer_step(params.tensors(config), g, opt, cfg);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(train_set.size());
    rec.valid_loss = mean_loss(config, params, valid_set, cfg.threads);
    auto [name, metric] = validation_metric(config, params, valid_set, cfg.threads);
    rec.valid_metric = metric;
    result.history.metric_name = name;
    result.history.epochs.push_back(rec);

    if (epoch == 1 || rec.valid_loss < best_loss) {
      best_loss = rec.valid_loss;
      result.best_params = params;
      result.history.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  result.history.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// ---------------------------------------------------------------------------
// Gradient check

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckResult grad_check(const MfnConfig& config, const MfnParams& params, const MultiViewSequence& seq,
                           double eps) {
  if (!(eps > 0.0)) throw DomainError("grad_check step must be > 0");
  Tape tape;
  MfnParams grads = zeros_like(params);
  const double loss = accumulate_gradients(tape, config, params, seq, grads);

  MfnParams probe = params;
  const auto probe_tensors = probe.tensors(config);
  const auto grad_tensors = grads.tensors(config);

  GradCheckResult result;
  result.loss_gap = std::abs(static_cast<double>(reference_loss<long double>(config, params, seq)) - loss);
  for (std::size_t k = 0; k < probe_tensors.size(); ++k) {
    auto& values = probe_tensors[k].second->data;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      const double up = saved + eps;
      const double down = saved - eps;
      values[i] = up;
      const long double plus = reference_loss<long double>(config, probe, seq);
      values[i] = down;
      const long double minus = reference_loss<long double>(config, probe, seq);
      values[i] = saved;
      const double numeric = static_cast<double>((plus - minus) / (static_cast<long double>(up) - down));
      const double analytic = grad_tensors[k].second->data[i];
      const double err = relative_error(analytic, numeric);
      ++result.entries;
      if (err > result.max_relative_error || result.entries == 1) {
        result.max_relative_error = err;
        result.worst_parameter = probe_tensors[k].first;
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace mfn
