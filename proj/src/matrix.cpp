#include "ddt/matrix.hpp"

#include <bit>
#include <cstdint>
#include <string>

#include "ddt/error.hpp"

namespace ddt {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != r * c)
    throw Error("matrix data has " + std::to_string(data.size()) + " elements, expected " +
                std::to_string(r) + "x" + std::to_string(c));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols, rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
  t.format_tag = format_tag;
  return t;
}

bool Matrix::bitwise_equal(const Matrix& other) const {
  if (rows != other.rows || cols != other.cols) return false;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (std::bit_cast<std::uint64_t>(data[i]) != std::bit_cast<std::uint64_t>(other.data[i]))
      return false;
  return true;
}

Matrix quantize_matrix(const Matrix& m, const FloatFormat& fmt) {
  Matrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.data.size(); ++i) out.data[i] = quantize(m.data[i], fmt);
  out.format_tag = fmt;
  return out;
}

}  // namespace ddt
