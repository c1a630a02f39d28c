// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "doctest.h"
#include "mfn/error.hpp"
#include "mfn/gated_memory.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace mfn;

namespace {

MemoryNets zero_nets(std::size_t in, std::size_t d_mem) {
  return {zero_mlp(in, {2 * d_mem}, d_mem, Activation::kRelu, Activation::kIdentity),
          zero_mlp(in, {2 * d_mem}, d_mem, Activation::kRelu, Activation::kSigmoid),
          zero_mlp(in, {2 * d_mem}, d_mem, Activation::kRelu, Activation::kSigmoid)};
}

MemoryNets random_nets(std::size_t in, std::size_t d_mem, Rng& rng, double scale = 1.0) {
  MemoryNets nets = zero_nets(in, d_mem);
  for (MlpParams* p : {&nets.proposal, &nets.retain, &nets.update}) {
    for (auto& w : p->weights)
      for (double& v : w.data) v = rng.uniform(-scale, scale);
    for (auto& b : p->biases)
      for (double& v : b.data) v = rng.uniform(-scale, scale);
  }
  return nets;
}

}  // namespace

TEST_CASE("zero memory networks halve the memory") {
  const MemoryNets nets = zero_nets(3, 2);
  const auto s = memory_update(nets, Tensor::vector({1, 2, 3}), Tensor::vector({1, 1}));
  CHECK(s.retain.data == std::vector<double>{0.5, 0.5});
  CHECK(s.update.data == std::vector<double>{0.5, 0.5});
  CHECK(s.proposal.data == std::vector<double>{0.0, 0.0});
  CHECK(s.u.data == std::vector<double>{0.5, 0.5});
}

TEST_CASE("zero memory networks decay geometrically") {
  const MemoryNets nets = zero_nets(2, 1);
  Tensor u = Tensor::vector({1.0});
  for (int k = 1; k <= 30; ++k) {
    u = memory_update(nets, Tensor::vector({0.3, -0.7}), u).u;
    CHECK(std::abs(u.data[0] - std::pow(0.5, k)) <= 1e-12);
  }
}

TEST_CASE("memory update matches the scalar oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t in = 1 + rng.below(8), d_mem = 1 + rng.below(6);
    const MemoryNets nets = random_nets(in, d_mem, rng);
    const Tensor c_hat = testutil::random_tensor({in}, rng, 2.0);
    const Tensor u_prev = testutil::random_tensor({d_mem}, rng, 2.0);
    const auto s = memory_update(nets, c_hat, u_prev);
    const auto o = oracle::memory(nets, c_hat.data, u_prev.data);
    CHECK(testutil::max_abs_diff(s.u.data, o.u) <= 1e-12);
    CHECK(testutil::max_abs_diff(s.proposal.data, o.proposal) <= 1e-12);
    CHECK(testutil::max_abs_diff(s.retain.data, o.retain) <= 1e-12);
    CHECK(testutil::max_abs_diff(s.update.data, o.update) <= 1e-12);
  }
}

TEST_CASE("gates stay in (0,1) and the memory grows by at most one per step") {
  Rng rng(32);
  for (int run = 0; run < 200; ++run) {
    // Pre-activations stay below ~31 here; beyond ~37 a double sigmoid rounds to 1.
    const MemoryNets nets = random_nets(4, 3, rng, 1.0);
    Tensor u = Tensor::vector(3);
    for (int t = 0; t < 20; ++t) {
      const auto s = memory_update(nets, testutil::random_tensor({4}, rng, 1.0), u);
      for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(s.retain.data[i] > 0.0);
        REQUIRE(s.retain.data[i] < 1.0);
        REQUIRE(s.update.data[i] > 0.0);
        REQUIRE(s.update.data[i] < 1.0);
        REQUIRE(std::abs(s.u.data[i]) <= std::abs(u.data[i]) + 1.0);
      }
      u = s.u;
    }
  }
}

TEST_CASE("the memory is not squashed into (0,1)") {
  MemoryNets nets = zero_nets(1, 1);
  nets.proposal.biases.back().data[0] = -5.0;
  nets.retain.biases.back().data[0] = 5.0;
  nets.update.biases.back().data[0] = 5.0;
  Tensor u = Tensor::vector(1);
  for (int t = 0; t < 10; ++t) u = memory_update(nets, Tensor::vector({0.0}), u).u;
  CHECK(u.data[0] < -1.0);
}

TEST_CASE("memory networks must agree on the memory width") {
  MemoryNets nets = zero_nets(3, 2);
  nets.update = zero_mlp(3, {4}, 3, Activation::kRelu, Activation::kSigmoid);
  CHECK_THROWS_AS(memory_update(nets, Tensor::vector(3), Tensor::vector(2)), DimensionError);
  CHECK_THROWS_AS(memory_update(zero_nets(3, 2), Tensor::vector(3), Tensor::vector(3)), DimensionError);
}

TEST_CASE("four-step memory unroll gradients match finite differences") {
  Rng rng(33);
  MemoryNets nets = random_nets(3, 2, rng);
  std::vector<Tensor> inputs;
  for (int t = 0; t < 4; ++t) inputs.push_back(testutil::random_tensor({3}, rng, 2.0));
  const Tensor r = testutil::random_tensor({2}, rng);
  auto record = [&](Tape& tape, MemoryNetVars* out) {
    const MemoryNetVars nv = bind(tape, nets);
    Var u = tape.zeros(2);
    for (const Tensor& x : inputs) u = memory_update(tape, nv, tape.constant(x), u).u;
    if (out) *out = nv;
    return tape.sum(tape.hadamard(u, tape.constant(r)));
  };
  auto value = [&] {
    Tape tape;
    return tape.scalar(record(tape, nullptr));
  };
  Tape tape;
  MemoryNetVars nv;
  tape.backward(record(tape, &nv));
  double worst = 0.0;
  std::size_t checked = 0;
  const std::pair<MlpParams*, const MlpVars*> nets_and_vars[] = {
      {&nets.proposal, &nv.proposal}, {&nets.retain, &nv.retain}, {&nets.update, &nv.update}};
  for (auto [p, v] : nets_and_vars) {
    for (std::size_t k = 0; k < p->weights.size(); ++k) {
      for (auto [t, var] : {std::pair{&p->weights[k], v->weights[k]}, std::pair{&p->biases[k], v->biases[k]}}) {
        const auto g = tape.grad(var);
        for (std::size_t i = 0; i < t->size(); ++i, ++checked) {
          const double n = testutil::central_difference(value, t->data[i]);
          worst = std::max(worst, std::abs(g[i] - n) / std::max(1e-8, std::abs(g[i]) + std::abs(n)));
        }
      }
    }
  }
  CHECK(checked == nets.proposal.parameter_count() * 3);
  CHECK(worst < 1e-4);
}
