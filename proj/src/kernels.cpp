#include "ddt/kernels.hpp"

#include <cmath>

#ifdef DDT_HAVE_OPENMP
#include <omp.h>
#endif

#include "ddt/error.hpp"

namespace ddt {
namespace {

void check_dims(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw Error("matmul dimension mismatch: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                " times " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
  if (a.empty() || b.empty()) throw Error("matmul on empty matrix");
}

void check_representable(const Matrix& m, const FloatFormat& fmt, const char* which) {
  if (m.format_tag && *m.format_tag == fmt) return;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!is_representable(m.data[i], fmt))
      throw Error(std::string("operand ") + which + " element " + std::to_string(i) +
                  " is not representable in " + fmt.label());
}

struct Accumulator {
  const FloatFormat& fmt;
  bool wide;
  double operator()(double x) const { return wide ? x : quantize(x, fmt); }
};

double sequential_sum(std::span<const double> u, std::span<const double> v, std::size_t begin,
                      std::size_t end, const Accumulator& q) {
  double acc = 0.0;
  for (std::size_t k = begin; k < end; ++k) acc = q(acc + u[k] * v[k]);
  return acc;
}

double pairwise_sum(std::span<const double> u, std::span<const double> v, std::size_t begin,
                    std::size_t end, const Accumulator& q) {
  if (end - begin == 1) return q(u[begin] * v[begin]);
  const std::size_t mid = begin + (end - begin) / 2;
  return q(pairwise_sum(u, v, begin, mid, q) + pairwise_sum(u, v, mid, end, q));
}

// Computes rows [row_begin, row_end) of C against the transposed B.
void matmul_rows(const Matrix& a, const Matrix& bt, const KernelConfig& cfg, Matrix& c,
                 std::size_t row_begin, std::size_t row_end) {
  for (std::size_t i = row_begin; i < row_end; ++i) {
    const auto arow = a.row(i);
    for (std::size_t j = 0; j < bt.rows; ++j) c(i, j) = dot_reduce(arow, bt.row(j), cfg);
  }
}

Matrix prepare_output(const Matrix& a, const Matrix& b, const KernelConfig& cfg) {
  cfg.validate();
  check_dims(a, b);
  check_representable(a, cfg.element_format, "A");
  check_representable(b, cfg.element_format, "B");
  Matrix c(a.rows, b.cols);
  c.format_tag = cfg.output_format;
  return c;
}

}  // namespace

std::string to_string(ReductionOrder order) {
  switch (order) {
    case ReductionOrder::Blocked:
      return "blocked";
    case ReductionOrder::Pairwise:
      return "pairwise";
    case ReductionOrder::Sequential:
      break;
  }
  return "sequential";
}

ReductionOrder parse_reduction(std::string_view name) {
  if (name == "sequential") return ReductionOrder::Sequential;
  if (name == "blocked") return ReductionOrder::Blocked;
  if (name == "pairwise") return ReductionOrder::Pairwise;
  throw Error("unknown reduction order '" + std::string(name) +
              "' (expected sequential, blocked or pairwise)");
}

KernelConfig KernelConfig::binary64() {
  return KernelConfig{kBinary64, kBinary64, ReductionOrder::Sequential, 32, kBinary64};
}

void KernelConfig::validate() const {
  if (block_size < 1) throw Error("block_size must be >= 1");
}

std::string KernelConfig::describe() const {
  std::string s = "element=" + element_format.label() + " accumulate=" + accumulate_format.label() +
                  " reduction=" + to_string(reduction);
  if (reduction == ReductionOrder::Blocked) s += "(" + std::to_string(block_size) + ")";
  return s + " output=" + output_format.label();
}

double dot_reduce(std::span<const double> u, std::span<const double> v, const KernelConfig& cfg) {
  if (u.size() != v.size())
    throw Error("dot_reduce length mismatch: " + std::to_string(u.size()) + " vs " +
                std::to_string(v.size()));
  if (u.empty()) throw Error("dot_reduce on empty vectors");
  const Accumulator q{cfg.accumulate_format, cfg.accumulate_format == kBinary64};
  const std::size_t n = u.size();

  double acc = 0.0;
  switch (cfg.reduction) {
    case ReductionOrder::Sequential:
      acc = sequential_sum(u, v, 0, n, q);
      break;
    case ReductionOrder::Blocked:
      for (std::size_t begin = 0; begin < n; begin += cfg.block_size) {
        const std::size_t end = std::min(n, begin + cfg.block_size);
        acc = q(acc + sequential_sum(u, v, begin, end, q));
      }
      break;
    case ReductionOrder::Pairwise:
      acc = pairwise_sum(u, v, 0, n, q);
      break;
  }
  return quantize(acc, cfg.output_format);
}

Matrix matmul_emulated_serial(const Matrix& a, const Matrix& b, const KernelConfig& cfg) {
  Matrix c = prepare_output(a, b, cfg);
  const Matrix bt = b.transposed();
  matmul_rows(a, bt, cfg, c, 0, a.rows);
  return c;
}

Matrix matmul_emulated(const Matrix& a, const Matrix& b, const KernelConfig& cfg, int threads) {
  Matrix c = prepare_output(a, b, cfg);
  const Matrix bt = b.transposed();
  const auto rows = static_cast<std::ptrdiff_t>(a.rows);
#ifdef DDT_HAVE_OPENMP
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::ptrdiff_t i = 0; i < rows; ++i)
    matmul_rows(a, bt, cfg, c, static_cast<std::size_t>(i), static_cast<std::size_t>(i) + 1);
#else
  (void)threads;
  matmul_rows(a, bt, cfg, c, 0, static_cast<std::size_t>(rows));
#endif
  return c;
}

Matrix matmul_oracle(const Matrix& a, const Matrix& b) {
  check_dims(a, b);
  Matrix c(a.rows, b.cols);
  c.format_tag = kBinary64;
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += a(i, k) * b(k, j);
      c(i, j) = acc;
    }
  }
  return c;
}

}  // namespace ddt
