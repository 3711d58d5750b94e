#pragma once

#include <span>
#include <string>
#include <vector>

#include "ddt/metrics.hpp"

namespace ddt {

/// Per-trial errors of one implementation against the oracle. Index i is
/// the trial index and pairs with index i of the counterpart distribution.
class DeltaDistribution {
 public:
  /// Throws ddt::Error if `values` is empty or holds a negative or
  /// non-finite entry.
  DeltaDistribution(std::vector<double> values, std::string label,
                    MetricKind metric = MetricKind::max_hybrid());

  std::span<const double> values() const { return values_; }
  const std::string& label() const { return label_; }
  const MetricKind& metric() const { return metric_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Copy with every value multiplied by `factor` (> 0).
  DeltaDistribution scaled(double factor) const;

 private:
  std::vector<double> values_;
  std::string label_;
  MetricKind metric_;
};

struct DescriptiveSummary {
  std::size_t n = 0;
  double mean = 0;
  double median = 0;
  double std = 0;  // n - 1 denominator
  bool std_defined = false;  // false when n < 2; std is then 0
  double min = 0;
  double max = 0;
  double p50 = 0;
  double p90 = 0;
  double p95 = 0;
  double p99 = 0;
};

enum class Alternative { TwoSided, Greater, Less };
enum class TestMode { Exact, Asymptotic };

std::string to_string(Alternative a);
std::string to_string(TestMode m);

struct TestResult {
  std::string method;
  double statistic = 0;
  double p_value = 1;
  std::size_t n_effective = 0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  TestMode mode = TestMode::Asymptotic;
  Alternative alternative = Alternative::TwoSided;
};

/// Linear interpolation between order statistics of an ascending sample,
/// k in [0, 100].
double percentile_sorted(std::span<const double> sorted, double k);

DescriptiveSummary describe(std::span<const double> values);
DescriptiveSummary describe(const DeltaDistribution& d);

/// Two-sample Kolmogorov-Smirnov, two-sided, asymptotic p-value.
TestResult ks_two_sample(std::span<const double> x, std::span<const double> y);
TestResult ks_two_sample(const DeltaDistribution& d1, const DeltaDistribution& d2);

/// Signed-rank test on D_i = x_i - y_i. Statistic is W+. Zero differences
/// are dropped; exact null distribution for n_effective <= 25 without ties,
/// normal approximation with tie and continuity correction otherwise.
TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                Alternative alternative);
TestResult wilcoxon_signed_rank(const DeltaDistribution& d1, const DeltaDistribution& d2,
                                Alternative alternative);

/// Exact binomial sign test on D_i = x_i - y_i. Statistic is the count of
/// positive differences.
TestResult sign_test(std::span<const double> x, std::span<const double> y,
                     Alternative alternative);
TestResult sign_test(const DeltaDistribution& d1, const DeltaDistribution& d2,
                     Alternative alternative);

TestResult paired_t_test(std::span<const double> x, std::span<const double> y,
                         Alternative alternative);
TestResult paired_t_test(const DeltaDistribution& d1, const DeltaDistribution& d2,
                         Alternative alternative);

/// Shapiro-Wilk W with Royston's p-value approximation; 3 <= n <= 5000.
TestResult shapiro_wilk(std::span<const double> sample);
TestResult shapiro_wilk(const DeltaDistribution& d);

/// Brown-Forsythe (median-centred Levene) test for equal spread.
struct VarianceTestResult {
  TestResult test;
  double spread_1 = 0;  // mean absolute deviation from the group median
  double spread_2 = 0;
};
VarianceTestResult variance_test(std::span<const double> x, std::span<const double> y);
VarianceTestResult variance_test(const DeltaDistribution& d1, const DeltaDistribution& d2);

}  // namespace ddt
