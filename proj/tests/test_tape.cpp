// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "mfn/error.hpp"
#include "mfn/random.hpp"
#include "mfn/tape.hpp"
#include "test_util.hpp"

using namespace mfn;

namespace {

std::vector<double> values(const Tensor& t) { return t.data; }

}  // namespace

TEST_CASE("matvec examples") {
  CHECK(values(matvec(Tensor::identity(2), Tensor::vector({3, 4}))) == std::vector<double>{3, 4});
  CHECK(values(matvec(Tensor::matrix(2, 2), Tensor::vector({3, 4}))) == std::vector<double>{0, 0});
  CHECK(values(matvec(Tensor::matrix({{1, 2}, {3, 4}}), Tensor::vector({1, 1}))) == std::vector<double>{3, 7});
}

TEST_CASE("matvec shape mismatch names both shapes") {
  try {
    matvec(Tensor::matrix(2, 3), Tensor::vector({1, 2}));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[2]") != std::string::npos);
  }
}

TEST_CASE("activation examples") {
  CHECK(activation(Tensor::vector({0}), Activation::kSigmoid).data[0] == 0.5);
  CHECK(activation(Tensor::vector({0}), Activation::kTanh).data[0] == 0.0);
  CHECK(values(activation(Tensor::vector({-2, 3}), Activation::kRelu)) == std::vector<double>{0, 3});
  CHECK(parse_activation("relu") == Activation::kRelu);
  CHECK_THROWS_AS(parse_activation("gelu"), ConfigError);
}

TEST_CASE("softmax examples") {
  CHECK(values(softmax(Tensor::vector({0, 0, 0, 0}))) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
  const Tensor p = softmax(Tensor::vector({std::log(1.0), std::log(3.0)}));
  CHECK(p.data[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(p.data[1] == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(softmax(Tensor::vector(std::vector<double>{})), DomainError);

  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor v = testutil::random_tensor({1 + rng.below(10)}, rng, 5.0);
    Tensor shifted = v;
    for (double& x : shifted.data) x += 7.0;
    CHECK(testutil::max_abs_diff(softmax(v).data, softmax(shifted).data) < 1e-15);
  }
}

TEST_CASE("softmax sums to one on random vectors") {
  Rng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Tensor v = testutil::random_tensor({1 + rng.below(64)}, rng, 20.0);
    double s = 0.0;
    for (double p : softmax(v).data) s += p;
    worst = std::max(worst, std::abs(s - 1.0));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("softmax is stable for large logits") {
  const Tensor p = softmax(Tensor::vector({1000, 1000}));
  CHECK(p.data[0] == 0.5);
  CHECK(log_sum_exp(Tensor::vector({1000, 1000})) == doctest::Approx(1000 + std::log(2.0)));
}

TEST_CASE("hadamard examples") {
  const Tensor a = Tensor::vector({1.5, -2});
  CHECK(values(hadamard(a, Tensor::vector({1, 1}))) == values(a));
  CHECK(values(hadamard(a, Tensor::vector({0, 0}))) == std::vector<double>{0, -0.0});
  CHECK(values(hadamard(Tensor::vector({2, 3}), Tensor::vector({4, 5}))) == std::vector<double>{8, 15});
  CHECK_THROWS_AS(hadamard(a, Tensor::vector({1, 2, 3})), DimensionError);
}

TEST_CASE("concat examples") {
  std::vector<Tensor> two = {Tensor::vector({1, 2}), Tensor::vector({3})};
  CHECK(values(concat(two)) == std::vector<double>{1, 2, 3});
  std::vector<Tensor> one = {Tensor::vector({4.25})};
  CHECK(values(concat(one)) == std::vector<double>{4.25});
  std::vector<Tensor> three = {Tensor::vector(2), Tensor::vector(3), Tensor::vector(4)};
  CHECK(concat(three).size() == 9);
  CHECK_THROWS_AS(concat(std::span<const Tensor>{}), DomainError);
}

TEST_CASE("backward closed forms") {
  Tape tape;
  Tensor x = Tensor::vector({3.0});
  const Var xv = tape.parameter(x);
  const Var y = tape.sum(tape.hadamard(xv, xv));
  tape.backward(y);
  CHECK(tape.grad(xv)[0] == 6.0);

  tape.clear();
  Tensor z = Tensor::vector({0.0});
  const Var zv = tape.parameter(z);
  tape.backward(tape.sum(tape.sigmoid(zv)));
  CHECK(tape.grad(zv)[0] == 0.25);
}

TEST_CASE("backward errors") {
  Tape tape;
  Tensor x = Tensor::vector({1.0, 2.0});
  const Var xv = tape.parameter(x);
  const Var t = tape.tanh(xv);
  CHECK_THROWS_AS(tape.backward(t), DomainError);
  const Var s = tape.sum(t);
  tape.backward(s);
  CHECK(tape.sealed());
  CHECK_THROWS_AS(tape.backward(s), StateError);
  CHECK_THROWS_AS(tape.tanh(xv), StateError);
  tape.clear();
  CHECK_THROWS_AS(tape.value(s), StateError);
}

TEST_CASE("non-finite values raise NumericError") {
  Tape tape;
  Tensor x = Tensor::vector({std::nan(""), 1.0});
  CHECK_THROWS_AS(tape.parameter(x), NumericError);
  tape.clear();
  Tensor big = Tensor::vector({1e200});
  const Var b = tape.parameter(big);
  CHECK_THROWS_AS(tape.hadamard(b, b), NumericError);
}

TEST_CASE("constants receive no gradient") {
  Tape tape;
  Tensor w = Tensor::matrix({{1, 2}, {3, 4}});
  const Var wv = tape.parameter(w);
  const Var x = tape.constant(Tensor::vector({1, -1}));
  tape.backward(tape.sum(tape.matvec(wv, x)));
  CHECK(tape.grad(x).empty());
  CHECK(std::vector<double>(tape.grad(wv).begin(), tape.grad(wv).end()) == std::vector<double>{1, -1, 1, -1});
}

TEST_CASE("nodes are recorded in topological order") {
  Tape tape;
  Tensor w = Tensor::matrix(3, 2, 0.1);
  Tensor b = Tensor::vector(3, 0.2);
  const Var wv = tape.parameter(w);
  const Var bv = tape.parameter(b);
  const Var x = tape.constant(Tensor::vector({1, 2}));
  const Var h = tape.relu(tape.affine({wv}, {x}, bv));
  const Var out = tape.log_sum_exp(tape.concat({h, tape.softmax(h)}));
  for (std::uint32_t i = 0; i < tape.node_count(); ++i) {
    for (std::uint32_t in : tape.inputs(Var{i})) CHECK(in < i);
  }
  CHECK(tape.op(out) == Op::kLogSumExp);
}

namespace {

// A random three-layer graph mixing every differentiable op.
struct Graph {
  Tensor w1, b1, w2, u2, b2, w3, x;

  explicit Graph(Rng& rng)
      : w1(testutil::random_tensor({5, 4}, rng)),
        b1(testutil::random_tensor({5}, rng)),
        w2(testutil::random_tensor({3, 5}, rng)),
        u2(testutil::random_tensor({3, 4}, rng)),
        b2(testutil::random_tensor({3}, rng)),
        w3(testutil::random_tensor({4, 11}, rng)),
        x(testutil::random_tensor({4}, rng)) {}

  std::vector<Tensor*> params() { return {&w1, &b1, &w2, &u2, &b2, &w3, &x}; }

  Var record(Tape& tape, std::vector<Var>* vars) {
    std::vector<Var> v;
    for (Tensor* t : params()) v.push_back(tape.parameter(*t));
    const Var h1 = tape.tanh(tape.affine({v[0]}, {v[6]}, v[1]));
    const Var g = tape.sigmoid(tape.affine({v[2], v[3]}, {h1, v[6]}, v[4]));
    const Var r = tape.relu(tape.sub(tape.matvec(v[2], h1), g));
    const Var mixed = tape.concat({tape.hadamard(g, r), tape.add(g, r), tape.softmax(h1)});
    const Var z = tape.matvec(v[5], mixed);
    const Var loss = tape.add(tape.log_sum_exp(z), tape.add(tape.cross_entropy(z, 2), tape.abs_error(tape.sum(z), 0.3)));
    if (vars) *vars = v;
    return loss;
  }

  double loss_value() {
    Tape tape;
    return tape.scalar(record(tape, nullptr));
  }
};

}  // namespace

TEST_CASE("random graph gradients match central differences") {
  Rng rng(2026);
  for (int trial = 0; trial < 5; ++trial) {
    Graph g(rng);
    Tape tape;
    std::vector<Var> vars;
    tape.backward(g.record(tape, &vars));
    double worst = 0.0;
    const auto params = g.params();
    for (std::size_t p = 0; p < params.size(); ++p) {
      const auto grad = tape.grad(vars[p]);
      for (std::size_t i = 0; i < params[p]->size(); ++i) {
        const double numeric = testutil::central_difference([&] { return g.loss_value(); }, params[p]->data[i]);
        const double a = grad[i];
        worst = std::max(worst, std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric)));
      }
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("replay is bitwise deterministic") {
  Rng rng(99);
  Graph g(rng);
  auto run = [&] {
    Tape tape;
    std::vector<Var> vars;
    const Var l = g.record(tape, &vars);
    tape.backward(l);
    std::vector<double> out = {tape.scalar(l)};
    for (Var v : vars) out.insert(out.end(), tape.grad(v).begin(), tape.grad(v).end());
    return out;
  };
  CHECK(run() == run());

  // Reusing a cleared tape gives the same answer as a fresh one.
  Tape reused;
  std::vector<Var> vars;
  g.record(reused, &vars);
  reused.clear();
  const Var l = g.record(reused, &vars);
  reused.backward(l);
  std::vector<double> out = {reused.scalar(l)};
  for (Var v : vars) out.insert(out.end(), reused.grad(v).begin(), reused.grad(v).end());
  CHECK(out == run());
}

TEST_CASE("cross entropy rejects out-of-range class") {
  Tape tape;
  const Var z = tape.constant(Tensor::vector({0, 0}));
  CHECK_THROWS_AS(tape.cross_entropy(z, 2), DomainError);
}

TEST_CASE("backward fault injection scales one rule") {
  Tape tape;
  Tensor x = Tensor::vector({0.0});
  {
    testing::ScopedBackwardFault fault(Op::kSigmoid, 2.0);
    const Var xv = tape.parameter(x);
    tape.backward(tape.sum(tape.sigmoid(xv)));
    CHECK(tape.grad(xv)[0] == 0.5);
  }
  tape.clear();
  const Var xv = tape.parameter(x);
  tape.backward(tape.sum(tape.sigmoid(xv)));
  CHECK(tape.grad(xv)[0] == 0.25);
}
