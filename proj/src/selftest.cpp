#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ddt/cli.hpp"
#include "ddt/minifloat.hpp"
#include "ddt/rng.hpp"
#include "ddt/stats.hpp"
#include "ddt/wire.hpp"

namespace ddt {
namespace {

// P(statistic >= observed) over all 2^n sign assignments of the ranks.
double enumerate_upper(const std::vector<double>& ranks, double observed, bool count_only) {
  const std::size_t n = ranks.size();
  std::uint64_t hits = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s += count_only ? 1.0 : ranks[i];
    if (s >= observed) ++hits;
  }
  return std::ldexp(static_cast<double>(hits), -static_cast<int>(n));
}

bool check_paired_tests(std::ostream& out) {
  TrialRng rng(2024, 0);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 3 + rng.below(10);
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform01();
      y[i] = rng.uniform01();
    }
    const auto w = wilcoxon_signed_rank(x, y, Alternative::Greater);
    std::vector<double> ranks(n);
    std::iota(ranks.begin(), ranks.end(), 1.0);
    if (w.p_value != enumerate_upper(ranks, w.statistic, false)) {
      out << "[FAIL] wilcoxon exact p-value disagrees with enumeration at n = " << n << "\n";
      return false;
    }
    const auto s = sign_test(x, y, Alternative::Greater);
    if (s.p_value != enumerate_upper(ranks, s.statistic, true)) {
      out << "[FAIL] sign test p-value disagrees with enumeration at n = " << n << "\n";
      return false;
    }
  }
  out << "[ok] wilcoxon and sign test match exhaustive sign enumeration\n";
  return true;
}

bool check_ks(std::ostream& out) {
  TrialRng rng(2024, 1);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(1 + rng.below(30));
    std::vector<double> y(1 + rng.below(30));
    for (double& v : x) v = std::floor(rng.uniform01() * 20);
    for (double& v : y) v = std::floor(rng.uniform01() * 20);
    double best = 0.0;
    for (const auto* pool : {&x, &y})
      for (double t : *pool) {
        double fx = 0;
        double fy = 0;
        for (double v : x) fx += v <= t;
        for (double v : y) fy += v <= t;
        best = std::max(best, std::fabs(fx / x.size() - fy / y.size()));
      }
    if (std::fabs(ks_two_sample(x, y).statistic - best) > 1e-15) {
      out << "[FAIL] KS statistic disagrees with brute-force ECDF supremum\n";
      return false;
    }
  }
  out << "[ok] KS statistic matches brute-force ECDF supremum\n";
  return true;
}

bool check_binary16(std::ostream& out) {
  for (std::uint32_t p = 0; p < 0x10000; ++p) {
    const int exp = static_cast<int>(p >> 10 & 0x1F);
    const int frac = static_cast<int>(p & 0x3FF);
    if (exp == 0x1F && frac != 0) continue;
    double v = exp == 0x1F ? INFINITY
                           : exp == 0 ? std::ldexp(frac, -24) : std::ldexp(1024 + frac, exp - 25);
    if (p & 0x8000) v = -v;
    if (std::bit_cast<std::uint64_t>(quantize(v, kBinary16)) != std::bit_cast<std::uint64_t>(v)) {
      out << "[FAIL] binary16 pattern " << p << " does not round-trip\n";
      return false;
    }
  }
  out << "[ok] all binary16 encodings are fixed points of quantize\n";
  return true;
}

bool check_codec(std::ostream& out) {
  TrialRng rng(2024, 2);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t bits = rng.next();
    const double v = std::bit_cast<double>(bits);
    if (std::isnan(v)) continue;
    if (std::bit_cast<std::uint64_t>(wire::decode_double(wire::encode_double(v))) != bits) {
      out << "[FAIL] wire codec does not round-trip\n";
      return false;
    }
  }
  out << "[ok] wire codec round-trips random bit patterns\n";
  return true;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  bool ok = true;
  ok &= check_paired_tests(out);
  ok &= check_ks(out);
  ok &= check_binary16(out);
  ok &= check_codec(out);
  out << (ok ? "selftest passed\n" : "selftest FAILED\n");
  return ok;
}

}  // namespace ddt
