// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mfn/error.hpp"

namespace mfn {

namespace {

template <typename A, typename B>
void check_lengths(std::span<A> a, std::span<B> b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": " + std::to_string(a.size()) + " predictions vs " +
                         std::to_string(b.size()) + " labels");
  }
  if (a.empty()) throw DomainError(std::string(what) + ": empty input");
}

void check_classes(std::span<const int> v, std::size_t k, const char* what) {
  for (int c : v) {
    if (c < 0 || static_cast<std::size_t>(c) >= k) {
      throw DomainError(std::string(what) + ": class " + std::to_string(c) + " outside [0, " + std::to_string(k) +
                        ")");
    }
  }
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_of(double tp, double fp, double fn) {
  const double p = safe_ratio(tp, tp + fp);
  const double r = safe_ratio(tp, tp + fn);
  return safe_ratio(2.0 * p * r, p + r);
}

}  // namespace

BinaryScores binary_metrics(std::span<const int> preds, std::span<const int> labels) {
  check_lengths(preds, labels, "binary_metrics");
  check_classes(preds, 2, "binary_metrics");
  check_classes(labels, 2, "binary_metrics");
  double tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    correct += preds[i] == labels[i];
    tp += preds[i] == 1 && labels[i] == 1;
    fp += preds[i] == 1 && labels[i] == 0;
    fn += preds[i] == 0 && labels[i] == 1;
  }
  BinaryScores s;
  s.accuracy = correct / static_cast<double>(preds.size());
  s.precision = safe_ratio(tp, tp + fp);
  s.recall = safe_ratio(tp, tp + fn);
  s.f1 = f1_of(tp, fp, fn);
  return s;
}

double multiclass_accuracy(std::span<const int> preds, std::span<const int> labels, std::size_t k) {
  check_lengths(preds, labels, "multiclass_accuracy");
  check_classes(preds, k, "multiclass_accuracy");
  check_classes(labels, k, "multiclass_accuracy");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double weighted_f1(std::span<const int> preds, std::span<const int> labels, std::size_t k) {
  check_lengths(preds, labels, "weighted_f1");
  check_classes(preds, k, "weighted_f1");
  check_classes(labels, k, "weighted_f1");
  std::vector<double> tp(k), fp(k), fn(k), support(k);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    support[labels[i]] += 1;
    if (preds[i] == labels[i]) {
      tp[preds[i]] += 1;
    } else {
      fp[preds[i]] += 1;
      fn[labels[i]] += 1;
    }
  }
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) total += support[c] * f1_of(tp[c], fp[c], fn[c]);
  return total / static_cast<double>(preds.size());
}

double mae(std::span<const double> preds, std::span<const double> labels) {
  check_lengths(preds, labels, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - labels[i]);
  return s / static_cast<double>(preds.size());
}

double pearson_r(std::span<const double> preds, std::span<const double> labels) {
  check_lengths(preds, labels, "pearson_r");
  if (preds.size() < 2) throw DomainError("pearson_r needs at least 2 points");
  const double n = static_cast<double>(preds.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    mx += preds[i];
    my += labels[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double dx = preds[i] - mx;
    const double dy = labels[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DomainError("pearson_r is undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<int> binarize_regression(std::span<const double> preds, double threshold) {
  std::vector<int> out(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) out[i] = preds[i] > threshold ? 1 : 0;
  return out;
}

std::vector<int> bin_regression(std::span<const double> values, int lo, int hi) {
  std::vector<int> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double r = std::clamp(std::round(values[i]), static_cast<double>(lo), static_cast<double>(hi));
    out[i] = static_cast<int>(r) - lo;
  }
  return out;
}

EvalReport regression_report(std::span<const double> preds, std::span<const double> labels) {
  EvalReport report;
  report.task = "regression";
  report.count = preds.size();
  report.metrics["mae"] = mae(preds, labels);
  try {
    report.metrics["pearson_r"] = pearson_r(preds, labels);
  } catch (const DomainError& e) {
    report.undefined["pearson_r"] = e.what();
  }
  const auto pb = binarize_regression(preds);
  const auto lb = binarize_regression(labels);
  const BinaryScores b = binary_metrics(pb, lb);
  report.metrics["binary_accuracy"] = b.accuracy;
  report.metrics["binary_f1"] = b.f1;
  report.metrics["ma7"] = multiclass_accuracy(bin_regression(preds, -3, 3), bin_regression(labels, -3, 3), 7);
  return report;
}

EvalReport classification_report(std::span<const int> preds, std::span<const int> labels, std::size_t k) {
  EvalReport report;
  report.task = "classification:" + std::to_string(k);
  report.count = preds.size();
  report.metrics["ma" + std::to_string(k)] = multiclass_accuracy(preds, labels, k);
  if (k == 2) {
    const BinaryScores b = binary_metrics(preds, labels);
    report.metrics["binary_accuracy"] = b.accuracy;
    report.metrics["binary_f1"] = b.f1;
  } else {
    report.metrics["weighted_f1"] = weighted_f1(preds, labels, k);
  }
  return report;
}

}  // namespace mfn
