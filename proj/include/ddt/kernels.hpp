#pragma once

#include <span>
#include <string>

#include "ddt/matrix.hpp"

namespace ddt {

enum class ReductionOrder { Sequential, Blocked, Pairwise };

std::string to_string(ReductionOrder order);
ReductionOrder parse_reduction(std::string_view name);

/// Emulated-precision matrix multiplication. Products are exact in binary64;
/// every partial sum is rounded to `accumulate_format`, the final value to
/// `output_format`.
struct KernelConfig {
  FloatFormat element_format = kBinary16;
  FloatFormat accumulate_format = kBinary32;
  ReductionOrder reduction = ReductionOrder::Sequential;
  std::size_t block_size = 32;
  FloatFormat output_format = kBinary16;

  /// All formats binary64 with sequential reduction; reproduces matmul_oracle.
  static KernelConfig binary64();

  void validate() const;
  std::string describe() const;
};

/// Inner product of two equal-length vectors under `cfg`. Overflow in the
/// accumulator propagates as an infinity.
double dot_reduce(std::span<const double> u, std::span<const double> v, const KernelConfig& cfg);

/// Serial reference: each C(i, j) = dot_reduce(row i of A, column j of B).
Matrix matmul_emulated_serial(const Matrix& a, const Matrix& b, const KernelConfig& cfg);

/// OpenMP-parallel over output rows; bitwise identical to the serial kernel
/// for any thread count. `threads` <= 0 uses the OpenMP default.
Matrix matmul_emulated(const Matrix& a, const Matrix& b, const KernelConfig& cfg, int threads = 0);

/// Plain binary64 matmul with sequential accumulation.
Matrix matmul_oracle(const Matrix& a, const Matrix& b);

}  // namespace ddt
