#pragma once

#include <string>
#include <string_view>

#include "ddt/matrix.hpp"

namespace ddt {

enum class Norm { L2, Linf };

/// Error metric comparing an implementation output with the oracle output.
struct MetricKind {
  enum class Variant { MaxHybrid, NormwiseRelative };
  Variant variant = Variant::MaxHybrid;
  Norm norm = Norm::L2;  // only meaningful for NormwiseRelative

  static MetricKind max_hybrid() { return {}; }
  static MetricKind normwise_relative(Norm n) { return {Variant::NormwiseRelative, n}; }

  /// "max_hybrid", "normwise_rel_l2" or "normwise_rel_linf".
  std::string name() const;
  friend bool operator==(const MetricKind&, const MetricKind&) = default;
};

MetricKind parse_metric(std::string_view name);

/// max_i |y_i - y'_i| / (1 + |y'_i|)
double max_hybrid_error(const Matrix& y, const Matrix& y_oracle);

/// ||y - y'|| / ||y'|| over the flattened matrices. 0/0 is 0; x/0 throws.
double normwise_relative_error(const Matrix& y, const Matrix& y_oracle, Norm norm);

double evaluate_metric(const MetricKind& metric, const Matrix& y, const Matrix& y_oracle);

}  // namespace ddt
