// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "mfn/error.hpp"

namespace mfn {

std::size_t shape_product(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(std::span<const std::size_t> shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  const std::size_t n = shape_product(shape);
  return Tensor{std::move(shape), std::vector<double>(n, 0.0)};
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor{{n}, std::move(values)};
}

Tensor Tensor::vector(std::size_t n, double fill) { return Tensor{{n}, std::vector<double>(n, fill)}; }

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) {
  return Tensor{{rows, cols}, std::vector<double>(rows * cols, fill)};
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  Tensor t = matrix(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Tensor::matrix: ragged rows");
    for (double v : row) t.data[i++] = v;
  }
  return t;
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t = matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

std::size_t Tensor::rows() const { return shape.empty() ? 0 : shape[0]; }

std::size_t Tensor::cols() const { return shape.size() < 2 ? 1 : shape[1]; }

std::span<const double> Tensor::row(std::size_t r) const {
  return std::span<const double>(data).subspan(r * cols(), cols());
}

bool Tensor::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace mfn
