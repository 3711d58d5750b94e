#include "ddt/verdict.hpp"

#include "ddt/error.hpp"

namespace ddt {
namespace {

constexpr const char* kEquivalenceCaveat =
    "Equivalent means the KS test did not reject at alpha; this is not a formal equivalence test.";
constexpr const char* kMultiplicityCaveat =
    "Tests are applied sequentially at the same alpha without multiple-comparison correction.";

Ratio ratio(double num, double den) {
  if (den == 0.0) return Ratio{std::nullopt, num == 0.0};
  return Ratio{num / den, false};
}

}  // namespace

std::string to_string(AccuracyVerdict v) {
  switch (v) {
    case AccuracyVerdict::Equivalent:
      return "Equivalent";
    case AccuracyVerdict::Impl1MoreAccurate:
      return "Impl1MoreAccurate";
    case AccuracyVerdict::Impl2MoreAccurate:
      return "Impl2MoreAccurate";
    case AccuracyVerdict::Inconclusive:
      break;
  }
  return "Inconclusive";
}

std::string to_string(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::Equivalent:
      return "Equivalent";
    case StabilityVerdict::Impl1MoreStable:
      return "Impl1MoreStable";
    case StabilityVerdict::Impl2MoreStable:
      return "Impl2MoreStable";
    case StabilityVerdict::Inconclusive:
      break;
  }
  return "Inconclusive";
}

Verdict decide_verdict(const DeltaDistribution& d1, const DeltaDistribution& d2, double alpha) {
  if (d1.size() != d2.size())
    throw Error("decide_verdict: unpaired distributions (" + std::to_string(d1.size()) + " vs " +
                std::to_string(d2.size()) + " trials)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("decide_verdict: alpha must be in (0, 1)");

  Verdict v;
  v.alpha = alpha;
  if (d1.size() < kMinVerdictSamples) {
    v.caveats.push_back("Fewer than " + std::to_string(kMinVerdictSamples) +
                        " paired trials; no conclusion drawn.");
    return v;
  }
  v.caveats.push_back(kMultiplicityCaveat);

  // Accuracy.
  const TestResult ks = ks_two_sample(d1, d2);
  v.evidence.push_back({"equivalence_gate", ks});
  if (ks.p_value >= alpha) {
    v.accuracy = AccuracyVerdict::Equivalent;
    v.caveats.push_back(kEquivalenceCaveat);
  } else {
    std::optional<TestResult> greater;
    std::optional<TestResult> less;
    try {
      greater = wilcoxon_signed_rank(d1, d2, Alternative::Greater);
      less = wilcoxon_signed_rank(d1, d2, Alternative::Less);
    } catch (const Error& e) {
      v.caveats.push_back(std::string("Wilcoxon signed-rank unavailable (") + e.what() +
                          "); fell back to the sign test.");
      try {
        greater = sign_test(d1, d2, Alternative::Greater);
        less = sign_test(d1, d2, Alternative::Less);
      } catch (const Error& e2) {
        v.caveats.push_back(std::string("Sign test unavailable (") + e2.what() + ").");
      }
    }
    if (greater && less) {
      v.evidence.push_back({"accuracy_direction", *greater});
      v.evidence.push_back({"accuracy_direction", *less});
      if (greater->p_value < alpha) {
        v.accuracy = AccuracyVerdict::Impl2MoreAccurate;
      } else if (less->p_value < alpha) {
        v.accuracy = AccuracyVerdict::Impl1MoreAccurate;
      }
    }
    if (v.accuracy == AccuracyVerdict::Inconclusive)
      v.caveats.push_back("Distributions differ (KS) but no paired test found a direction at alpha.");
  }

  // Normality gate on the paired differences; the t-test only corroborates.
  std::vector<double> diffs(d1.size());
  for (std::size_t i = 0; i < d1.size(); ++i) diffs[i] = d1[i] - d2[i];
  if (diffs.size() <= 5000) {
    try {
      const TestResult sw = shapiro_wilk(diffs);
      v.evidence.push_back({"normality_gate", sw});
      if (sw.p_value >= alpha) {
        const Alternative alt = v.accuracy == AccuracyVerdict::Impl1MoreAccurate ? Alternative::Less
                                                                                   : Alternative::Greater;
        v.evidence.push_back({"corroborating", paired_t_test(d1, d2, alt)});
      }
    } catch (const Error& e) {
      v.caveats.push_back(std::string("Normality gate skipped: ") + e.what());
    }
  } else {
    v.caveats.push_back("Normality gate skipped: more than 5000 paired trials.");
  }

  // Stability.
  try {
    const VarianceTestResult vt = variance_test(d1, d2);
    v.evidence.push_back({"stability", vt.test});
    if (vt.test.p_value >= alpha)
      v.stability = StabilityVerdict::Equivalent;
    else
      v.stability = vt.spread_1 < vt.spread_2 ? StabilityVerdict::Impl1MoreStable
                                              : StabilityVerdict::Impl2MoreStable;
  } catch (const Error& e) {
    v.caveats.push_back(std::string("Stability test unavailable: ") + e.what());
  }
  return v;
}

SummaryComparison compare_summaries(const DescriptiveSummary& s1, const DescriptiveSummary& s2) {
  return SummaryComparison{ratio(s1.mean, s2.mean), ratio(s1.p99, s2.p99), ratio(s1.max, s2.max),
                           ratio(s1.std, s2.std)};
}

}  // namespace ddt
