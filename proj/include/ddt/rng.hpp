#pragma once

#include <cstdint>
#include <random>

namespace ddt {

/// SplitMix64 finalizer; used to derive independent per-trial seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Random stream for one trial. The stream depends only on (seed, trial),
/// so trials can run in any order or in parallel. The variate transforms
/// are written out here rather than taken from <random> distributions,
/// whose output is implementation-defined.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(trial + 0x632BE59BD9B4E019ULL))) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via the Marsaglia polar method.
  double normal();

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ddt
