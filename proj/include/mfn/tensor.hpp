// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mfn {

/// Dense row-major array of doubles. Rank 1 (vector) or rank 2 (matrix) in
/// practice; the shape is stored generally. product(shape) == data.size()
/// always holds for tensors built through the factory functions.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor vector(std::vector<double> values);
  static Tensor vector(std::initializer_list<double> values) { return vector(std::vector<double>(values)); }
  static Tensor vector(std::size_t n, double fill = 0.0);
  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Builds a matrix from nested rows; all rows must share one length.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

  /// Row r of a matrix as a view.
  std::span<const double> row(std::size_t r) const;

  bool all_finite() const;
  bool operator==(const Tensor&) const = default;
};

/// "[2x3]" style rendering used in error messages.
std::string shape_string(std::span<const std::size_t> shape);

std::size_t shape_product(std::span<const std::size_t> shape);

}  // namespace mfn
