// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include <map>

#include "doctest.h"
#include "mfn/error.hpp"
#include "mfn/lstm.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace mfn;

namespace {

LstmParams random_lstm(std::size_t d_x, std::size_t d_c, Rng& rng) {
  LstmParams p = init_lstm(d_x, d_c, rng);
  for (auto& b : p.b)
    for (double& v : b.data) v = rng.uniform(-1, 1);
  return p;
}

LstmState random_state(std::size_t d_c, Rng& rng) {
  return {testutil::random_tensor({d_c}, rng), testutil::random_tensor({d_c}, rng)};
}

}  // namespace

TEST_CASE("zero LSTM keeps the zero state") {
  const LstmParams p = zero_lstm(3, 1);
  const auto r = lstm_step(p, Tensor::vector({5, -1, 2}), LstmState::zeros(1));
  CHECK(r.state.c.data == std::vector<double>{0.0});
  CHECK(r.state.h.data == std::vector<double>{0.0});
}

TEST_CASE("zero LSTM from c = 1") {
  const LstmParams p = zero_lstm(3, 1);
  const auto r = lstm_step(p, Tensor::vector({5, -1, 2}), {Tensor::vector({1.0}), Tensor::vector({0.0})});
  CHECK(r.gates[kInputGate].data[0] == 0.5);
  CHECK(r.gates[kForgetGate].data[0] == 0.5);
  CHECK(r.gates[kOutputGate].data[0] == 0.5);
  CHECK(r.gates[kProposal].data[0] == 0.0);
  CHECK(r.state.c.data[0] == 0.5);
  CHECK(std::abs(r.state.h.data[0] - 0.5 * std::tanh(0.5)) <= 1e-12);
  CHECK(r.state.h.data[0] == doctest::Approx(0.23106).epsilon(1e-4));
}

TEST_CASE("LSTM step matches the scalar oracle") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d_x = 1 + rng.below(6), d_c = 1 + rng.below(6);
    const LstmParams p = random_lstm(d_x, d_c, rng);
    const LstmState s = random_state(d_c, rng);
    const Tensor x = testutil::random_tensor({d_x}, rng, 2.0);
    const auto r = lstm_step(p, x, s);
    const auto o = oracle::lstm(p, x.data, s.c.data, s.h.data);
    CHECK(testutil::max_abs_diff(r.state.c.data, o.c) <= 1e-12);
    CHECK(testutil::max_abs_diff(r.state.h.data, o.h) <= 1e-12);
    CHECK(testutil::max_abs_diff(r.gates[kInputGate].data, o.i) <= 1e-12);
    CHECK(testutil::max_abs_diff(r.gates[kForgetGate].data, o.f) <= 1e-12);
    CHECK(testutil::max_abs_diff(r.gates[kOutputGate].data, o.o) <= 1e-12);
    CHECK(testutil::max_abs_diff(r.gates[kProposal].data, o.m) <= 1e-12);
    for (double h : r.state.h.data) CHECK(std::abs(h) < 1.0);
  }
}

TEST_CASE("init_lstm: shapes, forget bias and determinism") {
  Rng a(7), b(7);
  const LstmParams p = init_lstm(3, 2, a);
  CHECK(p == init_lstm(3, 2, b));
  CHECK(p.b[kForgetGate].data == std::vector<double>{1.0, 1.0});
  CHECK(p.b[kInputGate].data == std::vector<double>{0.0, 0.0});
  CHECK(p.parameter_count() == 48);
  CHECK(lstm_parameter_count(3, 2) == 48);
  CHECK(p.input_dim() == 3);
  CHECK(p.hidden_dim() == 2);
}

TEST_CASE("LSTM rejects mismatched shapes") {
  const LstmParams p = zero_lstm(3, 2);
  CHECK_THROWS_AS(lstm_step(p, Tensor::vector({1, 2}), LstmState::zeros(2)), DimensionError);
  CHECK_THROWS_AS(lstm_step(p, Tensor::vector({1, 2, 3}), LstmState::zeros(3)), DimensionError);
}

TEST_CASE("system_step with one view equals lstm_step") {
  Rng rng(8);
  const LstmParams p = random_lstm(3, 4, rng);
  const LstmState s = random_state(4, rng);
  const Tensor x = testutil::random_tensor({3}, rng);
  const auto sys = system_step({{"l", p}}, {{"l", x}}, {{"l", s}});
  const auto one = lstm_step(p, x, s);
  CHECK(sys.at("l").c == one.state.c);
  CHECK(sys.at("l").h == one.state.h);
}

TEST_CASE("system_step isolates views") {
  Rng rng(9);
  std::map<std::string, LstmParams> params = {
      {"l", random_lstm(3, 5, rng)}, {"v", random_lstm(2, 4, rng)}, {"a", random_lstm(7, 6, rng)}};
  std::map<std::string, Tensor> inputs = {{"l", testutil::random_tensor({3}, rng)},
                                          {"v", testutil::random_tensor({2}, rng)},
                                          {"a", testutil::random_tensor({7}, rng)}};
  std::map<std::string, LstmState> prev = {{"l", random_state(5, rng)}, {"v", random_state(4, rng)},
                                           {"a", random_state(6, rng)}};
  const auto base = system_step(params, inputs, prev);
  CHECK(base.at("l").h.size() == 5);
  CHECK(base.at("v").h.size() == 4);
  CHECK(base.at("a").h.size() == 6);
  inputs["a"].data[0] += 1.0;
  const auto perturbed = system_step(params, inputs, prev);
  CHECK(perturbed.at("l").c == base.at("l").c);
  CHECK(perturbed.at("l").h == base.at("l").h);
  CHECK(perturbed.at("v").c == base.at("v").c);
  CHECK(perturbed.at("v").h == base.at("v").h);
  CHECK(perturbed.at("a").h != base.at("a").h);
}

TEST_CASE("system_step schema errors name the view") {
  Rng rng(10);
  std::map<std::string, LstmParams> params = {{"l", zero_lstm(2, 2)}, {"v", zero_lstm(2, 2)}};
  std::map<std::string, LstmState> prev = {{"l", LstmState::zeros(2)}, {"v", LstmState::zeros(2)}};
  try {
    system_step(params, {{"l", Tensor::vector(2)}}, prev);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("'v'") != std::string::npos);
  }
  try {
    system_step(params, {{"l", Tensor::vector(2)}, {"v", Tensor::vector(2)}, {"x", Tensor::vector(2)}}, prev);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("'x'") != std::string::npos);
  }
}

TEST_CASE("three views with 300/35/74 inputs step without error") {
  Rng rng(12);
  std::map<std::string, LstmParams> params = {
      {"l", init_lstm(300, 64, rng)}, {"v", init_lstm(35, 16, rng)}, {"a", init_lstm(74, 16, rng)}};
  std::map<std::string, Tensor> inputs = {{"l", testutil::random_tensor({300}, rng)},
                                          {"v", testutil::random_tensor({35}, rng)},
                                          {"a", testutil::random_tensor({74}, rng)}};
  std::map<std::string, LstmState> prev = {
      {"l", LstmState::zeros(64)}, {"v", LstmState::zeros(16)}, {"a", LstmState::zeros(16)}};
  const auto next = system_step(params, inputs, prev);
  CHECK(next.at("l").h.size() == 64);
  CHECK(next.at("a").h.all_finite());
}

namespace {

// Runs two views for `steps` steps on a tape and returns sum(h_n^T * r) for
// the chosen view; inputs are parameters so their gradients are visible.
struct TwoViewUnroll {
  LstmParams pa, pb;
  std::vector<Tensor> xa, xb;
  Tensor r;

  double run(bool view_a, Tape& tape, std::vector<Var>* xa_vars, std::vector<Var>* xb_vars,
             std::vector<Var>* pa_vars = nullptr) {
    const LstmVars va = bind(tape, pa), vb = bind(tape, pb);
    LstmStateVars sa{tape.zeros(pa.hidden_dim()), tape.zeros(pa.hidden_dim())};
    LstmStateVars sb{tape.zeros(pb.hidden_dim()), tape.zeros(pb.hidden_dim())};
    for (std::size_t t = 0; t < xa.size(); ++t) {
      const Var a = tape.parameter(xa[t]);
      const Var b = tape.parameter(xb[t]);
      if (xa_vars) xa_vars->push_back(a);
      if (xb_vars) xb_vars->push_back(b);
      sa = lstm_step(tape, va, a, sa);
      sb = lstm_step(tape, vb, b, sb);
    }
    if (pa_vars) {
      for (int g = 0; g < 4; ++g) pa_vars->insert(pa_vars->end(), {va.w[g], va.u[g], va.b[g]});
    }
    const Var h = view_a ? sa.h : sb.h;
    const Var weight = tape.constant(view_a ? r : Tensor::vector(std::vector<double>(pb.hidden_dim(), 1.0)));
    const Var loss = tape.sum(tape.hadamard(h, weight));
    tape.backward(loss);
    return tape.scalar(loss);
  }

  double value(bool view_a) {
    Tape tape;
    return run(view_a, tape, nullptr, nullptr);
  }
};

TwoViewUnroll make_unroll(Rng& rng) {
  TwoViewUnroll u{random_lstm(3, 4, rng), random_lstm(2, 3, rng), {}, {}, testutil::random_tensor({4}, rng)};
  for (int t = 0; t < 4; ++t) {
    u.xa.push_back(testutil::random_tensor({3}, rng));
    u.xb.push_back(testutil::random_tensor({2}, rng));
  }
  return u;
}

}  // namespace

TEST_CASE("outputs of one view do not depend on another view's inputs") {
  Rng rng(13);
  TwoViewUnroll u = make_unroll(rng);
  Tape tape;
  std::vector<Var> xa, xb;
  u.run(true, tape, &xa, &xb);
  for (Var v : xb)
    for (double g : tape.grad(v)) CHECK(g == 0.0);
  // Finite differences are exactly zero as well.
  for (auto& x : u.xb)
    for (double& v : x.data) CHECK(testutil::central_difference([&] { return u.value(true); }, v) == 0.0);
}

TEST_CASE("four-step LSTM unroll gradients match finite differences") {
  Rng rng(14);
  TwoViewUnroll u = make_unroll(rng);
  Tape tape;
  std::vector<Var> xa, xb, pa;
  u.run(true, tape, &xa, &xb, &pa);
  std::vector<Tensor*> tensors;
  for (int g = 0; g < 4; ++g) tensors.insert(tensors.end(), {&u.pa.w[g], &u.pa.u[g], &u.pa.b[g]});
  std::vector<Var> vars = pa;
  for (std::size_t t = 0; t < u.xa.size(); ++t) {
    tensors.push_back(&u.xa[t]);
    vars.push_back(xa[t]);
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    const auto grad = tape.grad(vars[k]);
    for (std::size_t i = 0; i < tensors[k]->size(); ++i) {
      const double n = testutil::central_difference([&] { return u.value(true); }, tensors[k]->data[i]);
      worst = std::max(worst, std::abs(grad[i] - n) / std::max(1e-8, std::abs(grad[i]) + std::abs(n)));
    }
  }
  CHECK(worst < 1e-4);
}
