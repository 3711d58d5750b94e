#include "ddt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "ddt/error.hpp"
#include "ddt/special_functions.hpp"

namespace ddt {
namespace {

constexpr std::size_t kWilcoxonExactLimit = 25;

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

void require_paired(std::span<const double> x, std::span<const double> y, const char* method) {
  if (x.size() != y.size())
    throw Error(std::string(method) + ": paired samples differ in length (" +
                std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  if (x.empty()) throw Error(std::string(method) + ": empty sample");
}

std::vector<double> nonzero_differences(std::span<const double> x, std::span<const double> y) {
  std::vector<double> d;
  d.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    if (diff != 0.0) d.push_back(diff);
  }
  return d;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_sorted(std::span<const double> s) { return percentile_sorted(s, 50.0); }

// Royston's polynomial helper: c[0] + c[1] x + c[2] x^2 + ...
double poly(std::span<const double> c, double x) {
  double r = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) r = r * x + c[i];
  return r;
}

// Combine the two one-sided tails into the p-value for `alt`.
double choose_tail(Alternative alt, double upper, double lower) {
  switch (alt) {
    case Alternative::Greater:
      return upper;
    case Alternative::Less:
      return lower;
    case Alternative::TwoSided:
      break;
  }
  return std::min(1.0, 2.0 * std::min(upper, lower));
}

}  // namespace

std::string to_string(Alternative a) {
  switch (a) {
    case Alternative::Greater:
      return "greater";
    case Alternative::Less:
      return "less";
    case Alternative::TwoSided:
      break;
  }
  return "two_sided";
}

std::string to_string(TestMode m) { return m == TestMode::Exact ? "exact" : "asymptotic"; }

DeltaDistribution::DeltaDistribution(std::vector<double> values, std::string label, MetricKind metric)
    : values_(std::move(values)), label_(std::move(label)), metric_(metric) {
  if (values_.empty()) throw Error("delta distribution '" + label_ + "' is empty");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]) || values_[i] < 0.0)
      throw Error("delta distribution '" + label_ + "' has invalid value at trial " +
                  std::to_string(i));
}

DeltaDistribution DeltaDistribution::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw Error("scale factor must be positive and finite");
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return DeltaDistribution(std::move(v), label_, metric_);
}

double percentile_sorted(std::span<const double> sorted, double k) {
  if (sorted.empty()) throw Error("percentile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * k / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

DescriptiveSummary describe(std::span<const double> values) {
  if (values.empty()) throw Error("describe: empty distribution");
  const auto s = sorted_copy(values);
  DescriptiveSummary out;
  out.n = s.size();
  out.mean = mean_of(values);
  if (out.n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(out.n - 1));
    out.std_defined = true;
  }
  out.min = s.front();
  out.max = s.back();
  out.p50 = percentile_sorted(s, 50);
  out.p90 = percentile_sorted(s, 90);
  out.p95 = percentile_sorted(s, 95);
  out.p99 = percentile_sorted(s, 99);
  out.median = out.p50;
  return out;
}

DescriptiveSummary describe(const DeltaDistribution& d) { return describe(d.values()); }

TestResult ks_two_sample(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw Error("ks_two_sample: empty sample");
  const auto a = sorted_copy(x);
  const auto b = sorted_copy(y);
  const auto n1 = static_cast<std::int64_t>(a.size());
  const auto n2 = static_cast<std::int64_t>(b.size());

  // Walk both samples; at every distinct value compare n2*i against n1*j so
  // the supremum is an exact integer ratio.
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int64_t best = 0;
  while (i < n1 && j < n2) {
    const double v = std::min(a[i], b[j]);
    while (i < n1 && a[i] == v) ++i;
    while (j < n2 && b[j] == v) ++j;
    best = std::max(best, std::abs(i * n2 - j * n1));
  }
  const double d = static_cast<double>(best) / (static_cast<double>(n1) * static_cast<double>(n2));

  const double ne = static_cast<double>(n1) * static_cast<double>(n2) / static_cast<double>(n1 + n2);
  const double sq = std::sqrt(ne);
  const double lambda = (sq + 0.12 + 0.11 / sq) * d;

  TestResult r;
  r.method = "ks_two_sample";
  r.statistic = d;
  r.p_value = d == 0.0 ? 1.0 : special::kolmogorov_sf(lambda);
  r.n_effective = static_cast<std::size_t>(std::min(n1, n2));
  r.n1 = a.size();
  r.n2 = b.size();
  r.mode = TestMode::Asymptotic;
  r.alternative = Alternative::TwoSided;
  return r;
}

TestResult ks_two_sample(const DeltaDistribution& d1, const DeltaDistribution& d2) {
  return ks_two_sample(d1.values(), d2.values());
}

TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                Alternative alternative) {
  require_paired(x, y, "wilcoxon_signed_rank");
  const auto diffs = nonzero_differences(x, y);
  if (diffs.empty()) throw Error("wilcoxon_signed_rank: distributions identical under pairing");
  const std::size_t n = diffs.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t p, std::size_t q) { return std::fabs(diffs[p]) < std::fabs(diffs[q]); });

  // Mid-ranks; tie_term accumulates sum(t^3 - t) over tie groups.
  double w_plus = 0.0;
  double tie_term = 0.0;
  bool ties = false;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    const double mag = std::fabs(diffs[order[start]]);
    while (end < n && std::fabs(diffs[order[end]]) == mag) ++end;
    const double t = static_cast<double>(end - start);
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    if (end - start > 1) {
      ties = true;
      tie_term += t * t * t - t;
    }
    for (std::size_t k = start; k < end; ++k)
      if (diffs[order[k]] > 0) w_plus += rank;
    start = end;
  }

  TestResult r;
  r.method = "wilcoxon_signed_rank";
  r.statistic = w_plus;
  r.n_effective = n;
  r.n1 = x.size();
  r.n2 = y.size();
  r.alternative = alternative;

  const double nd = static_cast<double>(n);
  if (n <= kWilcoxonExactLimit && !ties) {
    // Null distribution of the rank sum by subset-sum counting.
    const std::size_t total = n * (n + 1) / 2;
    std::vector<std::uint64_t> counts(total + 1, 0);
    counts[0] = 1;
    for (std::size_t rank = 1; rank <= n; ++rank)
      for (std::size_t s = total; s >= rank; --s) counts[s] += counts[s - rank];
    const auto w = static_cast<std::size_t>(w_plus);
    std::uint64_t upper = 0;
    std::uint64_t lower = 0;
    for (std::size_t s = 0; s <= total; ++s) {
      if (s >= w) upper += counts[s];
      if (s <= w) lower += counts[s];
    }
    const int neg_n = -static_cast<int>(n);
    r.mode = TestMode::Exact;
    r.p_value = choose_tail(alternative, std::ldexp(static_cast<double>(upper), neg_n),
                            std::ldexp(static_cast<double>(lower), neg_n));
    return r;
  }

  const double mean = nd * (nd + 1.0) / 4.0;
  const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
  const double sd = std::sqrt(var);
  const double upper = special::normal_sf((w_plus - mean - 0.5) / sd);
  const double lower = special::normal_cdf((w_plus - mean + 0.5) / sd);
  r.mode = TestMode::Asymptotic;
  if (alternative == Alternative::TwoSided) {
    const double z = std::max(0.0, std::fabs(w_plus - mean) - 0.5) / sd;
    r.p_value = std::min(1.0, 2.0 * special::normal_sf(z));
  } else {
    r.p_value = choose_tail(alternative, upper, lower);
  }
  return r;
}

TestResult wilcoxon_signed_rank(const DeltaDistribution& d1, const DeltaDistribution& d2,
                                Alternative alternative) {
  return wilcoxon_signed_rank(d1.values(), d2.values(), alternative);
}

TestResult sign_test(std::span<const double> x, std::span<const double> y, Alternative alternative) {
  require_paired(x, y, "sign_test");
  const auto diffs = nonzero_differences(x, y);
  if (diffs.empty()) throw Error("sign_test: distributions identical under pairing");
  const auto n = static_cast<long>(diffs.size());
  const auto pos = static_cast<long>(std::count_if(diffs.begin(), diffs.end(), [](double d) { return d > 0; }));

  TestResult r;
  r.method = "sign_test";
  r.statistic = static_cast<double>(pos);
  r.n_effective = diffs.size();
  r.n1 = x.size();
  r.n2 = y.size();
  r.mode = TestMode::Exact;
  r.alternative = alternative;
  const double upper = special::binomial_half_upper(n, pos);
  const double lower = special::binomial_half_upper(n, n - pos);  // P(X <= pos) by symmetry
  r.p_value = choose_tail(alternative, upper, lower);
  return r;
}

TestResult sign_test(const DeltaDistribution& d1, const DeltaDistribution& d2, Alternative alternative) {
  return sign_test(d1.values(), d2.values(), alternative);
}

TestResult paired_t_test(std::span<const double> x, std::span<const double> y, Alternative alternative) {
  require_paired(x, y, "paired_t_test");
  const std::size_t n = x.size();
  if (n < 2) throw Error("paired_t_test: need at least 2 pairs");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - y[i];
  const double mean = mean_of(d);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) throw Error("paired_t_test: differences have zero variance");

  const double nd = static_cast<double>(n);
  const double t = mean / (sd / std::sqrt(nd));
  const double df = nd - 1.0;

  TestResult r;
  r.method = "paired_t_test";
  r.statistic = t;
  r.n_effective = n;
  r.n1 = n;
  r.n2 = n;
  r.mode = TestMode::Exact;
  r.alternative = alternative;
  if (alternative == Alternative::TwoSided)
    r.p_value = std::min(1.0, 2.0 * special::student_t_sf(std::fabs(t), df));
  else
    r.p_value = choose_tail(alternative, special::student_t_sf(t, df), special::student_t_cdf(t, df));
  return r;
}

TestResult paired_t_test(const DeltaDistribution& d1, const DeltaDistribution& d2, Alternative alternative) {
  return paired_t_test(d1.values(), d2.values(), alternative);
}

TestResult shapiro_wilk(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3 || n > 5000)
    throw Error("shapiro_wilk: sample size must be in [3, 5000], got " + std::to_string(n));
  const auto x = sorted_copy(sample);
  if (x.back() - x.front() == 0.0) throw Error("shapiro_wilk: sample has zero variance");

  const double nd = static_cast<double>(n);
  const std::size_t half = n / 2;

  // Royston's approximation to the normalized expected order statistics.
  static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
  static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
  std::vector<double> a(half + 1, 0.0);  // 1-based
  if (n == 3) {
    a[1] = std::sqrt(0.5);
  } else {
    double summ2 = 0.0;
    for (std::size_t i = 1; i <= half; ++i) {
      a[i] = special::normal_quantile((static_cast<double>(i) - 0.375) / (nd + 0.25));
      summ2 += a[i] * a[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(nd);
    const double a1 = poly(c1, rsn) - a[1] / ssumm2;
    std::size_t first_scaled;
    double fac;
    if (n > 5) {
      first_scaled = 3;
      const double a2 = -a[2] / ssumm2 + poly(c2, rsn);
      fac = std::sqrt((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[2] = a2;
    } else {
      first_scaled = 2;
      fac = std::sqrt((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1));
    }
    a[1] = a1;
    for (std::size_t i = first_scaled; i <= half; ++i) a[i] /= -fac;
  }

  const double mean = mean_of(x);
  double ssq = 0.0;
  for (double v : x) ssq += (v - mean) * (v - mean);
  double num = 0.0;
  for (std::size_t i = 1; i <= half; ++i) num += a[i] * (x[n - i] - x[i - 1]);
  const double w = std::min(1.0, num * num / ssq);

  TestResult r;
  r.method = "shapiro_wilk";
  r.statistic = w;
  r.n_effective = n;
  r.n1 = n;
  r.mode = TestMode::Asymptotic;
  r.alternative = Alternative::TwoSided;

  if (n == 3) {
    constexpr double kSixOverPi = 1.90985931710274;
    constexpr double kPiOverThree = 1.04719755119660;
    r.p_value = std::clamp(kSixOverPi * (std::asin(std::sqrt(w)) - kPiOverThree), 0.0, 1.0);
    return r;
  }

  static constexpr double g[] = {-2.273, 0.459};
  static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
  static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
  static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
  static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};

  if (w >= 1.0) {
    r.p_value = 1.0;
    return r;
  }
  double y = std::log(1.0 - w);
  double m;
  double s;
  if (n <= 11) {
    const double gamma = poly(g, nd);
    if (y >= gamma) {
      r.p_value = 1e-99;
      return r;
    }
    y = -std::log(gamma - y);
    m = poly(c3, nd);
    s = std::exp(poly(c4, nd));
  } else {
    const double ln = std::log(nd);
    m = poly(c5, ln);
    s = std::exp(poly(c6, ln));
  }
  r.p_value = std::clamp(special::normal_sf((y - m) / s), 0.0, 1.0);
  return r;
}

TestResult shapiro_wilk(const DeltaDistribution& d) { return shapiro_wilk(d.values()); }

VarianceTestResult variance_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) throw Error("variance_test: each sample needs at least 2 values");
  auto abs_dev = [](std::span<const double> v) {
    const auto s = sorted_copy(v);
    const double med = median_sorted(s);
    std::vector<double> z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) z[i] = std::fabs(v[i] - med);
    return z;
  };
  const auto z1 = abs_dev(x);
  const auto z2 = abs_dev(y);
  const double n1 = static_cast<double>(z1.size());
  const double n2 = static_cast<double>(z2.size());
  const double m1 = mean_of(z1);
  const double m2 = mean_of(z2);
  const double grand = (n1 * m1 + n2 * m2) / (n1 + n2);
  const double between = n1 * (m1 - grand) * (m1 - grand) + n2 * (m2 - grand) * (m2 - grand);
  double within = 0.0;
  for (double v : z1) within += (v - m1) * (v - m1);
  for (double v : z2) within += (v - m2) * (v - m2);
  if (within == 0.0 && between == 0.0)
    throw Error("variance_test: both samples are degenerate");

  const double df2 = n1 + n2 - 2.0;
  VarianceTestResult out;
  out.spread_1 = m1;
  out.spread_2 = m2;
  TestResult& r = out.test;
  r.method = "brown_forsythe";
  r.n_effective = z1.size() + z2.size();
  r.n1 = z1.size();
  r.n2 = z2.size();
  r.mode = TestMode::Asymptotic;
  r.alternative = Alternative::TwoSided;
  if (within == 0.0) {
    r.statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
  } else {
    r.statistic = df2 * between / within;
    r.p_value = std::clamp(special::f_sf(r.statistic, 1.0, df2), 0.0, 1.0);
  }
  return out;
}

VarianceTestResult variance_test(const DeltaDistribution& d1, const DeltaDistribution& d2) {
  return variance_test(d1.values(), d2.values());
}

}  // namespace ddt
