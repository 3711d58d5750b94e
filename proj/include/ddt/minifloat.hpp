#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace ddt {

/// A binary floating-point format with IEEE-754 layout: sign bit,
/// `exponent_bits` biased exponent, `mantissa_bits` explicit fraction bits,
/// gradual underflow and infinities.
struct FloatFormat {
  int exponent_bits = 11;
  int mantissa_bits = 52;
  std::string_view name = "binary64";

  /// Validates the parameters and returns the format. Throws ddt::Error.
  static FloatFormat make(int exponent_bits, int mantissa_bits);

  constexpr int bias() const { return (1 << (exponent_bits - 1)) - 1; }
  constexpr int min_exponent() const { return 1 - bias(); }
  constexpr int max_exponent() const { return bias(); }

  /// Canonical spelling accepted by parse_format.
  std::string label() const;

  friend constexpr bool operator==(const FloatFormat& a, const FloatFormat& b) {
    return a.exponent_bits == b.exponent_bits && a.mantissa_bits == b.mantissa_bits;
  }
};

inline constexpr FloatFormat kBinary16{5, 10, "binary16"};
inline constexpr FloatFormat kBFloat16{8, 7, "bfloat16"};
// IEEE-style E4M3 (max finite 240, inf at exponent 15); not the OCP variant.
inline constexpr FloatFormat kFp8E4M3{4, 3, "fp8_e4m3"};
inline constexpr FloatFormat kFp8E5M2{5, 2, "fp8_e5m2"};
inline constexpr FloatFormat kBinary32{8, 23, "binary32"};
inline constexpr FloatFormat kBinary64{11, 52, "binary64"};

struct FormatProperties {
  double max_finite;
  double min_normal;
  double min_subnormal;
  double machine_epsilon;
};

FormatProperties format_properties(const FloatFormat& fmt);

/// Parses "binary16", "bfloat16", "fp8_e4m3", "fp8_e5m2", "binary32",
/// "binary64" or the custom form "(e=E,m=M)". Throws ddt::Error.
FloatFormat parse_format(std::string_view text);

namespace detail {

inline constexpr std::uint64_t kSignMask = 0x8000000000000000ULL;
inline constexpr std::uint64_t kFractionMask = 0x000FFFFFFFFFFFFFULL;
inline constexpr std::uint64_t kImplicitBit = 0x0010000000000000ULL;
inline constexpr std::uint64_t kInfBits = 0x7FF0000000000000ULL;
inline constexpr std::uint64_t kQuietNaNBits = 0x7FF8000000000000ULL;

// Handles magnitudes below the target's smallest normal.
double quantize_subnormal(std::uint64_t mag, std::uint64_t sign, const FloatFormat& fmt) noexcept;

}  // namespace detail

/// Rounds `x` to the nearest value representable in `fmt` (ties to even)
/// and returns it widened to binary64. Overflow goes to a signed infinity,
/// underflow keeps the sign of zero, NaN comes back as the quiet NaN.
inline double quantize(double x, const FloatFormat& fmt) noexcept {
  using namespace detail;
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  const std::uint64_t sign = bits & kSignMask;
  const std::uint64_t mag = bits & ~kSignMask;
  if (mag >= kInfBits) return mag == kInfBits ? x : std::bit_cast<double>(kQuietNaNBits);
  const int m = fmt.mantissa_bits;
  if (mag == 0 || (m == 52 && fmt.exponent_bits == 11)) return x;

  const int biased = static_cast<int>(mag >> 52);
  if (biased == 0 || biased - 1023 < fmt.min_exponent()) return quantize_subnormal(mag, sign, fmt);

  // Normal in the target: round away the low fraction bits. A carry out of
  // the fraction bumps the exponent, which is the correctly rounded result.
  const int shift = 52 - m;
  std::uint64_t out = mag;
  if (shift > 0) {
    const std::uint64_t half = std::uint64_t{1} << (shift - 1);
    const std::uint64_t lsb = (mag >> shift) & 1;
    out = (mag + (half - 1) + lsb) & ~((half << 1) - 1);
  }
  const std::uint64_t max_finite_bits = (static_cast<std::uint64_t>(fmt.max_exponent() + 1023) << 52) |
                                        (((std::uint64_t{1} << m) - 1) << shift);
  if (out > max_finite_bits) out = kInfBits;
  return std::bit_cast<double>(out | sign);
}

/// True when quantize(x, fmt) == x bitwise.
bool is_representable(double x, const FloatFormat& fmt) noexcept;

}  // namespace ddt
