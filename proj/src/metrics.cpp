#include "ddt/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ddt/error.hpp"

namespace ddt {
namespace {

void check_inputs(const Matrix& y, const Matrix& y_oracle) {
  if (y.rows != y_oracle.rows || y.cols != y_oracle.cols)
    throw Error("metric shape mismatch: " + std::to_string(y.rows) + "x" + std::to_string(y.cols) +
                " vs oracle " + std::to_string(y_oracle.rows) + "x" + std::to_string(y_oracle.cols));
  if (y.empty()) throw Error("metric undefined on empty matrices");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y.data[i]))
      throw Error("non-finite implementation output at index " + std::to_string(i));
    if (!std::isfinite(y_oracle.data[i]))
      throw Error("non-finite oracle output at index " + std::to_string(i));
  }
}

}  // namespace

std::string MetricKind::name() const {
  if (variant == Variant::MaxHybrid) return "max_hybrid";
  return norm == Norm::L2 ? "normwise_rel_l2" : "normwise_rel_linf";
}

MetricKind parse_metric(std::string_view name) {
  if (name == "max_hybrid") return MetricKind::max_hybrid();
  if (name == "normwise_rel_l2") return MetricKind::normwise_relative(Norm::L2);
  if (name == "normwise_rel_linf") return MetricKind::normwise_relative(Norm::Linf);
  throw Error("unknown metric '" + std::string(name) +
              "' (expected max_hybrid, normwise_rel_l2 or normwise_rel_linf)");
}

double max_hybrid_error(const Matrix& y, const Matrix& y_oracle) {
  check_inputs(y, y_oracle);
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double ref = y_oracle.data[i];
    worst = std::max(worst, std::fabs(y.data[i] - ref) / (1.0 + std::fabs(ref)));
  }
  return worst;
}

double normwise_relative_error(const Matrix& y, const Matrix& y_oracle, Norm norm) {
  check_inputs(y, y_oracle);
  double num = 0.0;
  double den = 0.0;
  if (norm == Norm::Linf) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      num = std::max(num, std::fabs(y.data[i] - y_oracle.data[i]));
      den = std::max(den, std::fabs(y_oracle.data[i]));
    }
  } else {
    // Scaled accumulation keeps the sums of squares from overflowing.
    double num_scale = 0.0;
    double den_scale = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      num_scale = std::max(num_scale, std::fabs(y.data[i] - y_oracle.data[i]));
      den_scale = std::max(den_scale, std::fabs(y_oracle.data[i]));
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (num_scale > 0) {
        const double d = (y.data[i] - y_oracle.data[i]) / num_scale;
        num += d * d;
      }
      if (den_scale > 0) {
        const double r = y_oracle.data[i] / den_scale;
        den += r * r;
      }
    }
    num = num_scale * std::sqrt(num);
    den = den_scale * std::sqrt(den);
  }
  if (den == 0.0) {
    if (num == 0.0) return 0.0;
    throw Error("relative error undefined at zero oracle");
  }
  return num / den;
}

double evaluate_metric(const MetricKind& metric, const Matrix& y, const Matrix& y_oracle) {
  if (metric.variant == MetricKind::Variant::MaxHybrid) return max_hybrid_error(y, y_oracle);
  return normwise_relative_error(y, y_oracle, metric.norm);
}

}  // namespace ddt
