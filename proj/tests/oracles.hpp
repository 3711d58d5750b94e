#pragma once
// Independent reference implementations used only by the tests. None of
// these call into the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

inline std::uint64_t bits(double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, sizeof u);
  return u;
}

inline double from_bits(std::uint64_t u) {
  double x;
  std::memcpy(&x, &u, sizeof x);
  return x;
}

// binary16 pattern -> value, by field extraction and ldexp.
inline double decode_binary16(std::uint16_t p) {
  const int sign = p >> 15;
  const int exp = (p >> 10) & 0x1F;
  const int frac = p & 0x3FF;
  double mag;
  if (exp == 0)
    mag = std::ldexp(static_cast<double>(frac), -24);
  else if (exp == 31)
    mag = frac == 0 ? std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();
  else
    mag = std::ldexp(static_cast<double>(1024 + frac), exp - 25);
  return sign ? -mag : mag;
}

// Round to a format with e exponent bits and m fraction bits using only
// ldexp/ilogb/nearbyint (the default rounding mode is ties-to-even).
inline double round_to_format(double x, int e, int m) {
  if (std::isnan(x) || std::isinf(x) || x == 0.0) return x;
  const int bias = (1 << (e - 1)) - 1;
  const int emin = 1 - bias;
  int exp = std::ilogb(x);
  if (exp < emin) exp = emin;
  const double r = std::ldexp(std::nearbyint(std::ldexp(x, m - exp)), exp - m);
  const double max_finite = std::ldexp(2.0 - std::ldexp(1.0, -m), bias);
  if (std::fabs(r) > max_finite) return std::copysign(std::numeric_limits<double>::infinity(), x);
  if (r == 0.0) return std::copysign(0.0, x);
  return r;
}

// p-values of the signed-rank statistic by listing every sign pattern.
// `diffs` must be nonzero with distinct magnitudes.
struct TwoTails {
  double greater;
  double less;
  double observed;
};

inline TwoTails wilcoxon_enumerate(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::fabs(diffs[a]) < std::fabs(diffs[b]); });
  std::vector<int> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = static_cast<int>(r + 1);
  int observed = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (diffs[i] > 0) observed += rank[i];
  std::uint64_t ge = 0, le = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    int w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) w += rank[i];
    if (w >= observed) ++ge;
    if (w <= observed) ++le;
  }
  return {static_cast<double>(ge) / static_cast<double>(total),
          static_cast<double>(le) / static_cast<double>(total), static_cast<double>(observed)};
}

inline TwoTails sign_enumerate(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  const auto pos = static_cast<int>(std::count_if(diffs.begin(), diffs.end(), [](double d) { return d > 0; }));
  std::uint64_t ge = 0, le = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    const int k = __builtin_popcountll(mask);
    if (k >= pos) ++ge;
    if (k <= pos) ++le;
  }
  return {static_cast<double>(ge) / static_cast<double>(total),
          static_cast<double>(le) / static_cast<double>(total), static_cast<double>(pos)};
}

// sup |F1 - F2| evaluated at every sample point by direct counting.
inline double ks_brute(const std::vector<double>& x, const std::vector<double>& y) {
  double d = 0.0;
  auto ecdf = [](const std::vector<double>& s, double t) {
    std::size_t c = 0;
    for (double v : s)
      if (v <= t) ++c;
    return static_cast<double>(c) / static_cast<double>(s.size());
  };
  for (const auto* s : {&x, &y})
    for (double t : *s) d = std::max(d, std::fabs(ecdf(x, t) - ecdf(y, t)));
  return d;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace oracle
