#include "ddt/minifloat.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "ddt/error.hpp"

namespace ddt {
namespace {

// Round the 53-bit significand `sig` (value = sig * 2^lsb_exp) to a multiple
// of 2^shift, ties to even. Returns the rounded multiple count.
std::uint64_t round_significand(std::uint64_t sig, int shift) {
  if (shift > 54) return 0;
  const std::uint64_t half = std::uint64_t{1} << (shift - 1);
  const std::uint64_t rem = sig & ((half << 1) - 1);
  std::uint64_t q = sig >> shift;
  if (rem > half || (rem == half && (q & 1))) ++q;
  return q;
}

constexpr std::array<FloatFormat, 6> kNamedFormats = {
    kBinary16, kBFloat16, kFp8E4M3, kFp8E5M2, kBinary32, kBinary64};

}  // namespace

FloatFormat FloatFormat::make(int exponent_bits, int mantissa_bits) {
  if (exponent_bits < 2 || exponent_bits > 11)
    throw Error("exponent_bits must be in [2, 11], got " + std::to_string(exponent_bits));
  if (mantissa_bits < 1 || mantissa_bits > 52)
    throw Error("mantissa_bits must be in [1, 52], got " + std::to_string(mantissa_bits));
  for (const auto& f : kNamedFormats)
    if (f.exponent_bits == exponent_bits && f.mantissa_bits == mantissa_bits) return f;
  return FloatFormat{exponent_bits, mantissa_bits, "custom"};
}

std::string FloatFormat::label() const {
  if (name != "custom") return std::string(name);
  return "(e=" + std::to_string(exponent_bits) + ",m=" + std::to_string(mantissa_bits) + ")";
}

FormatProperties format_properties(const FloatFormat& fmt) {
  const int m = fmt.mantissa_bits;
  return FormatProperties{
      .max_finite = std::ldexp(2.0 - std::ldexp(1.0, -m), fmt.max_exponent()),
      .min_normal = std::ldexp(1.0, fmt.min_exponent()),
      .min_subnormal = std::ldexp(1.0, fmt.min_exponent() - m),
      .machine_epsilon = std::ldexp(1.0, -m),
  };
}

FloatFormat parse_format(std::string_view text) {
  for (const auto& f : kNamedFormats)
    if (f.name == text) return f;

  // (e=E,m=M)
  auto fail = [&] {
    return Error("unknown float format '" + std::string(text) +
                 "' (expected binary16, bfloat16, fp8_e4m3, fp8_e5m2, binary32, "
                 "binary64 or (e=E,m=M))");
  };
  std::string compact;
  for (char c : text)
    if (c != ' ' && c != '\t') compact.push_back(c);
  if (compact.size() < 9 || compact.rfind("(e=", 0) != 0 || compact.back() != ')') throw fail();
  const char* p = compact.data() + 3;
  const char* end = compact.data() + compact.size() - 1;
  int e = 0;
  int m = 0;
  auto r1 = std::from_chars(p, end, e);
  if (r1.ec != std::errc{} || std::string_view(r1.ptr, end).rfind(",m=", 0) != 0) throw fail();
  auto r2 = std::from_chars(r1.ptr + 3, end, m);
  if (r2.ec != std::errc{} || r2.ptr != end) throw fail();
  return FloatFormat::make(e, m);
}

namespace detail {

double quantize_subnormal(std::uint64_t mag, std::uint64_t sign, const FloatFormat& fmt) noexcept {
  const int m = fmt.mantissa_bits;
  const int biased = static_cast<int>(mag >> 52);
  const int exp = (biased == 0 ? 1 : biased) - 1023;
  const int emin = fmt.min_exponent();
  const std::uint64_t sig = biased == 0 ? (mag & kFractionMask) : ((mag & kFractionMask) | kImplicitBit);
  const int shift = (emin - m) - (exp - 52);
  if (shift <= 0) return std::bit_cast<double>(mag | sign);
  const std::uint64_t q = round_significand(sig, shift);
  // q * 2^(emin - m) never exceeds the smallest normal, so no overflow check.
  return std::bit_cast<double>(std::bit_cast<std::uint64_t>(std::ldexp(static_cast<double>(q), emin - m)) | sign);
}

}  // namespace detail

bool is_representable(double x, const FloatFormat& fmt) noexcept {
  return std::bit_cast<std::uint64_t>(quantize(x, fmt)) == std::bit_cast<std::uint64_t>(x);
}

}  // namespace ddt
