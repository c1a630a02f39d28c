// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/model.hpp"

#include <cmath>
#include <set>

#include "mfn/error.hpp"

namespace mfn {

// ---------------------------------------------------------------------------
// Variant / config

Variant Variant::parse(const std::string& name) {
  if (name == "full") return full();
  if (name == "no_delta") return no_delta();
  if (name == "no_mem") return no_memory();
  const std::string prefix = "single_view:";
  if (name.rfind(prefix, 0) == 0 && name.size() > prefix.size()) return single_view(name.substr(prefix.size()));
  throw ConfigError("unknown variant '" + name + "' (expected full, no_delta, no_mem or single_view:<view>)");
}

std::string Variant::name() const {
  switch (kind) {
    case VariantKind::kFull: return "full";
    case VariantKind::kNoDelta: return "no_delta";
    case VariantKind::kNoMemory: return "no_mem";
    case VariantKind::kSingleView: return "single_view:" + view;
  }
  return "?";
}

MfnConfig MfnConfig::make(std::vector<ViewSpec> views, std::size_t memory_dim, Task task, Variant variant) {
  MfnConfig c;
  c.views = std::move(views);
  c.memory_dim = memory_dim;
  c.task = task;
  c.variant = std::move(variant);
  c.attention_hidden = {4 * c.total_hidden()};
  c.memory_hidden = {2 * memory_dim};
  return c;
}

MfnConfig MfnConfig::default_config() {
  return make({{"l", 300, 64}, {"v", 35, 16}, {"a", 74, 16}}, 64, Task::regression());
}

MfnConfig MfnConfig::tiny_config() {
  return make({{"l", 3, 4}, {"v", 3, 4}, {"a", 3, 4}}, 5, Task::classification(2));
}

std::size_t MfnConfig::total_hidden() const {
  std::size_t n = 0;
  for (const auto& v : views) n += v.hidden_dim;
  return n;
}

std::vector<ViewSpec> MfnConfig::active_views() const {
  if (variant.kind != VariantKind::kSingleView) return views;
  const ViewSpec* v = find_view(variant.view);
  if (!v) throw ConfigError("single_view variant names unknown view '" + variant.view + "'");
  return {*v};
}

std::size_t MfnConfig::attention_dim() const {
  return variant.kind == VariantKind::kNoDelta ? total_hidden() : 2 * total_hidden();
}

std::size_t MfnConfig::feature_dim() const {
  std::size_t n = 0;
  for (const auto& v : active_views()) n += v.hidden_dim;
  return variant.has_memory() ? n + memory_dim : n;
}

const ViewSpec* MfnConfig::find_view(const std::string& name) const {
  for (const auto& v : views)
    if (v.name == name) return &v;
  return nullptr;
}

void MfnConfig::validate() const {
  if (views.empty()) throw ConfigError("config has no views");
  std::set<std::string> names;
  for (const auto& v : views) {
    if (v.name.empty()) throw ConfigError("view with empty name");
    if (!names.insert(v.name).second) throw ConfigError("duplicate view name '" + v.name + "'");
    if (v.input_dim == 0 || v.hidden_dim == 0) throw ConfigError("view '" + v.name + "' has a zero dimension");
  }
  if (memory_dim == 0) throw ConfigError("memory_dim must be >= 1");
  for (std::size_t h : attention_hidden)
    if (h == 0) throw ConfigError("attention hidden width must be >= 1");
  for (std::size_t h : memory_hidden)
    if (h == 0) throw ConfigError("memory hidden width must be >= 1");
  if (attention_hidden_activation == Activation::kSoftmax || memory_hidden_activation == Activation::kSoftmax) {
    throw ConfigError("softmax is not a hidden activation");
  }
  if (task.kind == TaskKind::kClassification && task.classes < 2) {
    throw ConfigError("classification needs at least 2 classes");
  }
  if (variant.kind == VariantKind::kSingleView && !find_view(variant.view)) {
    throw ConfigError("single_view variant names unknown view '" + variant.view + "'");
  }
}

MfnConfig MfnConfig::with_variant(Variant v) const {
  MfnConfig c = *this;
  c.variant = std::move(v);
  return c;
}

// ---------------------------------------------------------------------------
// Parameters

namespace {

template <typename Params, typename TensorPtr, typename Out>
void enumerate(Params& p, const MfnConfig& config, Out& out) {
  const auto views = config.active_views();
  for (std::size_t k = 0; k < p.lstms.size(); ++k) {
    const std::string prefix = "lstm." + (k < views.size() ? views[k].name : std::to_string(k)) + ".";
    for (std::size_t g = 0; g < 4; ++g) out.emplace_back(prefix + "W_" + kGateNames[g], TensorPtr(&p.lstms[k].w[g]));
    for (std::size_t g = 0; g < 4; ++g) out.emplace_back(prefix + "U_" + kGateNames[g], TensorPtr(&p.lstms[k].u[g]));
    for (std::size_t g = 0; g < 4; ++g) out.emplace_back(prefix + "b_" + kGateNames[g], TensorPtr(&p.lstms[k].b[g]));
  }
  auto add_mlp = [&](const std::string& prefix, auto& mlp) {
    for (std::size_t k = 0; k < mlp.weights.size(); ++k) {
      out.emplace_back(prefix + ".W" + std::to_string(k), TensorPtr(&mlp.weights[k]));
      out.emplace_back(prefix + ".b" + std::to_string(k), TensorPtr(&mlp.biases[k]));
    }
  };
  if (p.attention) add_mlp("attention", *p.attention);
  if (p.memory) {
    add_mlp("memory.proposal", p.memory->proposal);
    add_mlp("memory.retain", p.memory->retain);
    add_mlp("memory.update", p.memory->update);
  }
  out.emplace_back("head.W", TensorPtr(&p.head.weight));
  out.emplace_back("head.b", TensorPtr(&p.head.bias));
}

}  // namespace

std::vector<std::pair<std::string, Tensor*>> MfnParams::tensors(const MfnConfig& config) {
  std::vector<std::pair<std::string, Tensor*>> out;
  enumerate<MfnParams, Tensor*>(*this, config, out);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> MfnParams::tensors(const MfnConfig& config) const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  enumerate<const MfnParams, const Tensor*>(*this, config, out);
  return out;
}

std::size_t MfnParams::parameter_count() const {
  std::size_t n = head.weight.size() + head.bias.size();
  for (const auto& l : lstms) n += l.parameter_count();
  if (attention) n += attention->parameter_count();
  if (memory) n += memory->proposal.parameter_count() + memory->retain.parameter_count() +
                   memory->update.parameter_count();
  return n;
}

namespace {

bool mlp_equal(const MlpParams& a, const MlpParams& b) {
  return a.weights == b.weights && a.biases == b.biases && a.hidden_activation == b.hidden_activation &&
         a.output_activation == b.output_activation;
}

}  // namespace

bool MfnParams::operator==(const MfnParams& other) const {
  if (lstms.size() != other.lstms.size()) return false;
  for (std::size_t k = 0; k < lstms.size(); ++k) {
    if (lstms[k].w != other.lstms[k].w || lstms[k].u != other.lstms[k].u || lstms[k].b != other.lstms[k].b)
      return false;
  }
  if (attention.has_value() != other.attention.has_value()) return false;
  if (attention && !mlp_equal(*attention, *other.attention)) return false;
  if (memory.has_value() != other.memory.has_value()) return false;
  if (memory && !(mlp_equal(memory->proposal, other.memory->proposal) &&
                  mlp_equal(memory->retain, other.memory->retain) && mlp_equal(memory->update, other.memory->update)))
    return false;
  return head.weight == other.head.weight && head.bias == other.head.bias;
}

ParamCount param_count(const MfnConfig& config) {
  config.validate();
  ParamCount count;
  for (const auto& v : config.active_views()) count.lstm += lstm_parameter_count(v.input_dim, v.hidden_dim);
  if (config.variant.has_memory()) {
    const std::size_t in = config.attention_dim();
    count.attention = mlp_parameter_count(in, config.attention_hidden, in);
    count.memory = 3 * mlp_parameter_count(in, config.memory_hidden, config.memory_dim);
  }
  count.head = config.task.output_dim() * (config.feature_dim() + 1);
  return count;
}

namespace {

MfnParams build_params(const MfnConfig& config, Rng* rng) {
  config.validate();
  MfnParams p;
  for (const auto& v : config.active_views()) {
    p.lstms.push_back(rng ? init_lstm(v.input_dim, v.hidden_dim, *rng) : zero_lstm(v.input_dim, v.hidden_dim));
  }
  auto make_mlp = [&](std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out, Activation h,
                      Activation o) { return rng ? glorot_mlp(in, hidden, out, h, o, *rng) : zero_mlp(in, hidden, out, h, o); };
  if (config.variant.has_memory()) {
    const std::size_t in = config.attention_dim();
    p.attention = make_mlp(in, config.attention_hidden, in, config.attention_hidden_activation, Activation::kSoftmax);
    MemoryNets nets;
    nets.proposal = make_mlp(in, config.memory_hidden, config.memory_dim, config.memory_hidden_activation,
                             Activation::kIdentity);
    nets.retain = make_mlp(in, config.memory_hidden, config.memory_dim, config.memory_hidden_activation,
                           Activation::kSigmoid);
    nets.update = make_mlp(in, config.memory_hidden, config.memory_dim, config.memory_hidden_activation,
                           Activation::kSigmoid);
    p.memory = std::move(nets);
  }
  p.head.weight = Tensor::matrix(config.task.output_dim(), config.feature_dim());
  p.head.bias = Tensor::vector(config.task.output_dim());
  if (rng) glorot_fill(p.head.weight, *rng);
  return p;
}

}  // namespace

MfnParams zero_params(const MfnConfig& config) { return build_params(config, nullptr); }

MfnParams init_params(const MfnConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  return build_params(config, &rng);
}

MfnParams zeros_like(const MfnParams& params) {
  MfnParams z = params;
  auto zero = [](Tensor& t) { std::fill(t.data.begin(), t.data.end(), 0.0); };
  for (auto& l : z.lstms) {
    for (auto& t : l.w) zero(t);
    for (auto& t : l.u) zero(t);
    for (auto& t : l.b) zero(t);
  }
  auto zero_mlp_params = [&](MlpParams& m) {
    for (auto& t : m.weights) zero(t);
    for (auto& t : m.biases) zero(t);
  };
  if (z.attention) zero_mlp_params(*z.attention);
  if (z.memory) {
    zero_mlp_params(z.memory->proposal);
    zero_mlp_params(z.memory->retain);
    zero_mlp_params(z.memory->update);
  }
  zero(z.head.weight);
  zero(z.head.bias);
  return z;
}

// ---------------------------------------------------------------------------
// Forward

MfnVars bind(Tape& tape, const MfnConfig& config, const MfnParams& params) {
  const auto views = config.active_views();
  if (params.lstms.size() != views.size()) {
    throw SchemaError("parameters hold " + std::to_string(params.lstms.size()) + " LSTMs but the variant uses " +
                      std::to_string(views.size()) + " views");
  }
  if (params.attention.has_value() != config.variant.has_memory() ||
      params.memory.has_value() != config.variant.has_memory()) {
    throw SchemaError("parameters do not match variant '" + config.variant.name() + "'");
  }
  MfnVars vars;
  for (std::size_t k = 0; k < views.size(); ++k) {
    const auto& l = params.lstms[k];
    if (l.input_dim() != views[k].input_dim || l.hidden_dim() != views[k].hidden_dim) {
      throw DimensionError("LSTM for view '" + views[k].name + "' has shape (" + std::to_string(l.input_dim()) +
                           ", " + std::to_string(l.hidden_dim()) + "), config says (" +
                           std::to_string(views[k].input_dim) + ", " + std::to_string(views[k].hidden_dim) + ")");
    }
    vars.lstms.push_back(bind(tape, l));
  }
  if (params.attention) {
    vars.attention = bind(tape, *params.attention);
    vars.memory = bind(tape, *params.memory);
  }
  if (params.head.weight.rank() != 2 || params.head.weight.cols() != config.feature_dim() ||
      params.head.weight.rows() != config.task.output_dim() || params.head.bias.size() != config.task.output_dim()) {
    throw DimensionError("prediction head " + shape_string(params.head.weight.shape) + " does not map " +
                         std::to_string(config.feature_dim()) + " features to " +
                         std::to_string(config.task.output_dim()) + " outputs");
  }
  vars.head_weight = tape.parameter(params.head.weight);
  vars.head_bias = tape.parameter(params.head.bias);
  return vars;
}

std::vector<Var> parameter_vars(const MfnVars& vars) {
  std::vector<Var> out;
  for (const auto& l : vars.lstms) {
    out.insert(out.end(), l.w.begin(), l.w.end());
    out.insert(out.end(), l.u.begin(), l.u.end());
    out.insert(out.end(), l.b.begin(), l.b.end());
  }
  auto add_mlp = [&](const MlpVars& m) {
    for (std::size_t k = 0; k < m.weights.size(); ++k) {
      out.push_back(m.weights[k]);
      out.push_back(m.biases[k]);
    }
  };
  if (vars.attention) add_mlp(*vars.attention);
  if (vars.memory) {
    add_mlp(vars.memory->proposal);
    add_mlp(vars.memory->retain);
    add_mlp(vars.memory->update);
  }
  out.push_back(vars.head_weight);
  out.push_back(vars.head_bias);
  return out;
}

void check_sequence(const MfnConfig& config, const MultiViewSequence& seq) {
  for (const auto& [name, _] : seq.views) {
    if (!config.find_view(name)) throw SchemaError("sequence '" + seq.id + "' has unknown view '" + name + "'");
  }
  std::size_t length = 0;
  for (const auto& v : config.views) {
    const auto it = seq.views.find(v.name);
    if (it == seq.views.end()) throw SchemaError("sequence '" + seq.id + "' lacks view '" + v.name + "'");
    const Tensor& m = it->second;
    if (m.rank() != 2 || m.cols() != v.input_dim) {
      throw DimensionError("sequence '" + seq.id + "' view '" + v.name + "' is " + shape_string(m.shape) +
                           ", expected width " + std::to_string(v.input_dim));
    }
    if (m.rows() == 0) throw AlignmentError("sequence '" + seq.id + "' view '" + v.name + "' is empty");
    if (length == 0) {
      length = m.rows();
    } else if (m.rows() != length) {
      throw AlignmentError("sequence '" + seq.id + "' view '" + v.name + "' has " + std::to_string(m.rows()) +
                           " steps, other views have " + std::to_string(length));
    }
  }
}

Var mfn_forward(Tape& tape, const MfnConfig& config, const MfnVars& vars, const MultiViewSequence& seq,
                ForwardTrace* trace) {
  check_sequence(config, seq);
  const auto views = config.active_views();
  const std::size_t steps = seq.length();
  std::vector<const Tensor*> inputs;
  std::vector<LstmStateVars> states;
  for (const auto& v : views) {
    inputs.push_back(&seq.views.at(v.name));
    const Var zero = tape.zeros(v.hidden_dim);
    states.push_back({zero, zero});
  }
  const bool memory = config.variant.has_memory();
  const bool delta = config.variant.kind == VariantKind::kFull;
  Var c_prev;
  Var u;
  if (memory) {
    c_prev = tape.zeros(config.total_hidden());
    u = tape.zeros(config.memory_dim);
  }
  if (trace) {
    trace->clear();
    trace->reserve(steps);
  }
  std::vector<Var> cs(views.size());
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t k = 0; k < views.size(); ++k) {
      const Var x = tape.constant(inputs[k]->row(t));
      states[k] = lstm_step(tape, vars.lstms[k], x, states[k]);
      cs[k] = states[k].c;
    }
    StepTrace* step = nullptr;
    if (trace) {
      step = &trace->emplace_back();
      for (const auto& s : states) step->lstm.push_back({tape.value_tensor(s.c), tape.value_tensor(s.h)});
    }
    if (!memory) continue;
    const Var c_curr = tape.concat(cs);
    const AttentionVars att = delta ? dman_attend(tape, *vars.attention, c_prev, c_curr)
                                    : dman_attend_no_delta(tape, *vars.attention, c_curr);
    const MemoryVars mem = memory_update(tape, *vars.memory, att.attended, u);
    u = mem.u;
    c_prev = c_curr;
    if (step) {
      step->attention = {tape.value_tensor(att.coefficients), tape.value_tensor(att.attended)};
      step->memory = {tape.value_tensor(mem.u), tape.value_tensor(mem.proposal), tape.value_tensor(mem.retain),
                      tape.value_tensor(mem.update)};
    }
  }
  std::vector<Var> parts;
  for (const auto& s : states) parts.push_back(s.h);
  if (memory) parts.push_back(u);
  return parts.size() == 1 ? parts.front() : tape.concat(parts);
}

Var head_output(Tape& tape, const MfnVars& vars, Var features) {
  return tape.affine({vars.head_weight}, {features}, vars.head_bias);
}

Var loss(Tape& tape, const Task& task, Var head_out, double label) {
  if (task.kind == TaskKind::kRegression) return tape.abs_error(head_out, label);
  if (label < 0 || label != std::floor(label) || label >= static_cast<double>(task.classes)) {
    throw DomainError("label " + std::to_string(label) + " is not a class index in [0, " +
                      std::to_string(task.classes) + ")");
  }
  return tape.cross_entropy(head_out, static_cast<std::size_t>(label));
}

ForwardResult mfn_forward(const MfnParams& params, const MfnConfig& config, const MultiViewSequence& seq,
                          bool capture_trace) {
  Tape tape;
  const MfnVars vars = bind(tape, config, params);
  ForwardResult out;
  const Var features = mfn_forward(tape, config, vars, seq, capture_trace ? &out.trace : nullptr);
  out.features = tape.value_tensor(features);
  return out;
}

Tensor predict(const PredictionHead& head, const Tensor& features, const Task& task) {
  Tape tape;
  if (head.weight.rank() != 2 || head.weight.cols() != features.size() ||
      head.weight.rows() != task.output_dim()) {
    throw DimensionError("prediction head " + shape_string(head.weight.shape) + " cannot score " +
                         std::to_string(features.size()) + " features for " + std::to_string(task.output_dim()) +
                         " outputs");
  }
  const Var out =
      tape.affine({tape.constant(head.weight)}, {tape.constant(features)}, tape.constant(head.bias));
  return tape.value_tensor(task.kind == TaskKind::kClassification ? tape.softmax(out) : out);
}

double loss_value(const Task& task, const Tensor& head_out, double label) {
  Tape tape;
  return tape.scalar(loss(tape, task, tape.constant(head_out), label));
}

Tensor Predictor::predict(const MultiViewSequence& seq) {
  tape_.clear();
  const MfnVars vars = bind(tape_, config_, params_);
  const Var out = head_output(tape_, vars, mfn_forward(tape_, config_, vars, seq));
  return tape_.value_tensor(config_.task.kind == TaskKind::kClassification ? tape_.softmax(out) : out);
}

double Predictor::loss(const MultiViewSequence& seq) {
  tape_.clear();
  const MfnVars vars = bind(tape_, config_, params_);
  const Var out = head_output(tape_, vars, mfn_forward(tape_, config_, vars, seq));
  return tape_.scalar(mfn::loss(tape_, config_.task, out, seq.label));
}

}  // namespace mfn
