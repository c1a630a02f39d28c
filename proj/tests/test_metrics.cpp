// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include <vector>

#include "doctest.h"
#include "mfn/error.hpp"
#include "mfn/metrics.hpp"
#include "mfn/random.hpp"

using namespace mfn;

using Ints = std::vector<int>;
using Reals = std::vector<double>;

TEST_CASE("binary metrics") {
  const Ints y = {1, 0, 1, 1, 0};
  const BinaryScores perfect = binary_metrics(y, y);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.f1 == 1.0);

  // TP=1, FP=1, FN=0, TN=1 (plus one more TN to make BA = 0.75).
  const BinaryScores s = binary_metrics(Ints{1, 1, 0, 0}, Ints{1, 0, 0, 0});
  CHECK(s.precision == 0.5);
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == 2.0 / 3.0);
  CHECK(s.accuracy == 0.75);

  const BinaryScores none = binary_metrics(Ints{0, 0, 0}, Ints{1, 0, 1});
  CHECK(none.f1 == 0.0);
  CHECK(none.accuracy == 1.0 / 3.0);

  CHECK_THROWS_AS(binary_metrics(Ints{1}, Ints{1, 0}), DimensionError);
  CHECK_THROWS_AS(binary_metrics(Ints{}, Ints{}), DomainError);
}

TEST_CASE("multiclass accuracy") {
  CHECK(multiclass_accuracy(Ints{0, 1, 2, 3}, Ints{0, 1, 2, 3}, 4) == 1.0);
  CHECK(multiclass_accuracy(Ints{0, 1, 2, 3}, Ints{1, 2, 3, 0}, 4) == 0.0);
  CHECK(multiclass_accuracy(Ints{0, 0, 0, 0}, Ints{0, 1, 2, 3}, 4) == 0.25);
  CHECK_THROWS_AS(multiclass_accuracy(Ints{4}, Ints{0}, 4), DomainError);
}

TEST_CASE("weighted F1") {
  const Ints y = {0, 1, 2, 2};
  CHECK(weighted_f1(y, y, 3) == 1.0);
  // class 0: f1 0 (support 1); class 1: P 1/2 R 1 -> 2/3 (support 1); class 2: P 1 R 1 -> 1 (support 2)
  CHECK(weighted_f1(Ints{1, 1, 2, 2}, y, 3) == doctest::Approx((0.0 + 2.0 / 3.0 + 2.0) / 4.0));
}

TEST_CASE("mean absolute error") {
  const Reals a = {1.5, -2, 3};
  CHECK(mae(a, a) == 0.0);
  CHECK(mae(Reals{1, 2}, Reals{2, 4}) == 1.5);
  CHECK(mae(Reals{1 + 10.0, 2 + 10.0}, Reals{2 + 10.0, 4 + 10.0}) == 1.5);
  CHECK_THROWS_AS(mae(Reals{}, Reals{}), DomainError);
}

TEST_CASE("pearson correlation") {
  CHECK(pearson_r(Reals{1, 2, 3, 4}, Reals{2, 4, 6, 8}) == 1.0);
  CHECK(pearson_r(Reals{1, 2, 3, 4}, Reals{-1, -2, -3, -4}) == -1.0);
  CHECK(pearson_r(Reals{1, -1, 1, -1}, Reals{1, 1, -1, -1}) == 0.0);
  CHECK_THROWS_AS(pearson_r(Reals{1, 1, 1}, Reals{1, 2, 3}), DomainError);
  CHECK_THROWS_AS(pearson_r(Reals{1}, Reals{1}), DomainError);
}

TEST_CASE("pearson correlation is invariant under positive affine maps") {
  Rng rng(2026);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(50);
    Reals x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = 0.5 * x[i] + rng.normal();
    }
    const double a = rng.uniform(0.1, 10.0), b = rng.uniform(-5.0, 5.0);
    Reals xs = x, ys = y;
    for (double& v : xs) v = a * v + b;
    for (double& v : ys) v = rng.uniform(0.1, 10.0) * 0 + a * v - b;
    const double r = pearson_r(x, y);
    worst = std::max({worst, std::abs(pearson_r(xs, y) - r), std::abs(pearson_r(x, ys) - r)});
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("binarize regression") {
  CHECK(binarize_regression(Reals{-1, 2}) == Ints{0, 1});
  CHECK(binarize_regression(Reals{0}) == Ints{0});
  CHECK(binarize_regression(Reals{1, 2}, 1.5) == Ints{0, 1});
}

TEST_CASE("regression binning rounds and clamps") {
  CHECK(bin_regression(Reals{-3.4, -0.4, 0.6, 2.5, 7}, -3, 3) == Ints{0, 3, 4, 6, 6});
}

TEST_CASE("reports are permutation invariant and bounded") {
  const Reals p = {0.3, -1.2, 2.9, 0.1, -2.5};
  const Reals y = {0.5, -1.0, 3.0, -0.2, -3.0};
  const EvalReport r = regression_report(p, y);
  const EvalReport q = regression_report(Reals{p[4], p[2], p[0], p[3], p[1]}, Reals{y[4], y[2], y[0], y[3], y[1]});
  for (const auto& [name, value] : r.metrics) CHECK(q.metrics.at(name) == doctest::Approx(value).epsilon(1e-12));
  CHECK(r.count == 5);
  for (const char* k : {"mae", "pearson_r", "binary_accuracy", "binary_f1", "ma7"}) CHECK(r.metrics.count(k) == 1);
  CHECK(r.metrics.at("binary_accuracy") == 0.8);

  const EvalReport flat = regression_report(Reals{1, 1, 1}, Reals{1, 2, 3});
  CHECK(flat.metrics.count("pearson_r") == 0);
  CHECK(flat.undefined.count("pearson_r") == 1);

  const EvalReport c = classification_report(Ints{0, 1, 1, 0}, Ints{0, 1, 0, 0}, 2);
  CHECK(c.metrics.at("ma2") == 0.75);
  CHECK(c.metrics.count("binary_f1") == 1);
  const EvalReport m = classification_report(Ints{0, 1, 2}, Ints{0, 1, 1}, 3);
  CHECK(m.metrics.count("weighted_f1") == 1);
  CHECK(m.metrics.at("ma3") == doctest::Approx(2.0 / 3.0));
}
