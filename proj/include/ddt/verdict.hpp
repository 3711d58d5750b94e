#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ddt/stats.hpp"

namespace ddt {

enum class AccuracyVerdict { Equivalent, Impl1MoreAccurate, Impl2MoreAccurate, Inconclusive };
enum class StabilityVerdict { Equivalent, Impl1MoreStable, Impl2MoreStable, Inconclusive };

std::string to_string(AccuracyVerdict v);
std::string to_string(StabilityVerdict v);

/// A test that contributed to a verdict, with the part it played.
struct Evidence {
  std::string role;  // "equivalence_gate", "accuracy_direction", "normality_gate", ...
  TestResult result;
};

struct Verdict {
  AccuracyVerdict accuracy = AccuracyVerdict::Inconclusive;
  StabilityVerdict stability = StabilityVerdict::Inconclusive;
  std::vector<Evidence> evidence;
  double alpha = 0.01;
  std::vector<std::string> caveats;
};

/// Smallest paired sample for which decide_verdict draws conclusions.
inline constexpr std::size_t kMinVerdictSamples = 20;

/// KS gates equivalence; otherwise one-sided Wilcoxon in both directions
/// (sign test on failure) decides which side is more accurate. A paired
/// t-test is recorded as corroboration when the differences pass a
/// Shapiro-Wilk normality check. Brown-Forsythe decides stability.
Verdict decide_verdict(const DeltaDistribution& d1, const DeltaDistribution& d2, double alpha);

/// s1/s2 ratio; nullopt encodes an infinite or undefined ratio (zero
/// denominator).
struct Ratio {
  std::optional<double> value;
  bool undefined = false;  // 0/0
};

struct SummaryComparison {
  Ratio mean;
  Ratio p99;
  Ratio max;
  Ratio spread;  // std ratio
};

SummaryComparison compare_summaries(const DescriptiveSummary& s1, const DescriptiveSummary& s2);

}  // namespace ddt
