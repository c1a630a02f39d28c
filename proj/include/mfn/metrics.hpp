// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mfn {

struct BinaryScores {
  double accuracy = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Accuracy and positive-class F1. Precision/recall with an empty
/// denominator count as 0, and F1 = 0 when precision + recall = 0.
BinaryScores binary_metrics(std::span<const int> preds, std::span<const int> labels);

/// MA(k): exact-match rate. Classes must lie in [0, k).
double multiclass_accuracy(std::span<const int> preds, std::span<const int> labels, std::size_t k);

/// Per-class F1 averaged with weights proportional to class support.
double weighted_f1(std::span<const int> preds, std::span<const int> labels, std::size_t k);

double mae(std::span<const double> preds, std::span<const double> labels);

/// Sample Pearson correlation. DomainError on length < 2 or a constant input.
double pearson_r(std::span<const double> preds, std::span<const double> labels);

/// 1 where p > threshold (strict), else 0.
std::vector<int> binarize_regression(std::span<const double> preds, double threshold = 0.0);

/// Rounds to the nearest integer, clamps to [lo, hi] and shifts to a class
/// index in [0, hi - lo]. Used for MA(7) on labels in [-3, 3].
std::vector<int> bin_regression(std::span<const double> values, int lo, int hi);

struct EvalReport {
  std::string task;  // "regression" or "classification:<k>"
  std::size_t count = 0;
  std::map<std::string, double> metrics;
  /// Metrics that are undefined on this data, with the reason.
  std::map<std::string, std::string> undefined;
};

EvalReport regression_report(std::span<const double> preds, std::span<const double> labels);
EvalReport classification_report(std::span<const int> preds, std::span<const int> labels, std::size_t k);

}  // namespace mfn
