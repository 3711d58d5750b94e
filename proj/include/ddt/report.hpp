#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddt/harness.hpp"
#include "ddt/stats.hpp"
#include "ddt/verdict.hpp"

namespace ddt {

inline constexpr const char* kReportSchemaVersion = "1.0";

/// Two histograms over one set of uniform bins spanning both samples.
struct HistogramPair {
  std::vector<double> bin_edges;  // nbins + 1, strictly increasing
  std::vector<std::size_t> counts_1;
  std::vector<std::size_t> counts_2;
};

/// Bins are half-open except the last, which is closed. If every value is
/// equal the result is one bin widened by machine epsilon.
HistogramPair histogram_shared_bins(std::span<const double> d1, std::span<const double> d2,
                                    std::size_t nbins = 100);

struct QuantilePoint {
  double q1;
  double q2;
};

/// Quantiles of both samples at levels k/(m+1), k = 1..m, m = min(n1, n2).
std::vector<QuantilePoint> qq_points(std::span<const double> d1, std::span<const double> d2);

/// A battery entry; `error` is set when the test could not be applied.
struct BatteryEntry {
  std::string name;
  std::optional<TestResult> result;
  std::string error;
};

struct Report {
  nlohmann::ordered_json config;
  std::string config_hash;
  std::string label_1;
  std::string label_2;
  std::string metric;
  std::vector<std::size_t> trials;
  std::vector<double> delta_1;
  std::vector<double> delta_2;
  DescriptiveSummary summary_1;
  DescriptiveSummary summary_2;
  SummaryComparison comparison;
  std::vector<BatteryEntry> tests;
  Verdict verdict;
  HistogramPair histogram;
  std::vector<QuantilePoint> qq;
  RunMetadata run;
  std::optional<std::string> timestamp;  // unset for reproducible output
};

struct ReportOptions {
  std::size_t histogram_bins = 100;
  bool timestamp = true;
};

/// Runs the descriptive statistics, the full test battery and the verdict
/// over a finished run.
Report build_report(const ExperimentConfig& cfg, const DualDeltaRun& run, const ReportOptions& options = {});

nlohmann::ordered_json report_to_json(const Report& report);
/// Header "trial,delta_1,delta_2"; shortest round-trip decimals.
std::string deltas_csv(const Report& report);
std::string histogram_svg(const Report& report);
std::string qq_svg(const Report& report);
std::string scatter_svg(const Report& report);

struct OutputFormats {
  bool json = false;
  bool csv = false;
  bool svg = false;
};

/// Parses a comma-separated subset of {json, csv, svg}.
OutputFormats parse_formats(std::string_view text);

/// Writes the selected artifacts into `dir` (created if missing). Each file
/// is written to a temporary name and renamed into place. Returns the
/// written paths.
std::vector<std::filesystem::path> render_report(const Report& report, const std::filesystem::path& dir,
                                                 const OutputFormats& formats);

}  // namespace ddt
