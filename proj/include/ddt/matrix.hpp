#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ddt/minifloat.hpp"

namespace ddt {

/// Dense row-major matrix of binary64 values. `format_tag`, when set,
/// asserts that every element is representable in that format.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::optional<FloatFormat> format_tag;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);

  static Matrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  Matrix transposed() const;

  /// Bitwise equality of shape and data (distinguishes -0.0, ignores tag).
  bool bitwise_equal(const Matrix& other) const;
};

/// Elementwise quantize; the result is tagged with `fmt`.
Matrix quantize_matrix(const Matrix& m, const FloatFormat& fmt);

}  // namespace ddt
