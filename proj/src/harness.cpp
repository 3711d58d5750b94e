#include "ddt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>

#ifdef DDT_HAVE_OPENMP
#include <omp.h>
#endif

#include "ddt/config.hpp"
#include "ddt/error.hpp"
#include "ddt/wire.hpp"

namespace ddt {
namespace {

struct NamedEdgeCase {
  EdgeCase value;
  std::string_view name;
};

constexpr NamedEdgeCase kEdgeCases[] = {
    {EdgeCase::Zeros, "zeros"},
    {EdgeCase::MaxQuarter, "max_quarter"},
    {EdgeCase::AlternatingLarge, "alternating_large"},
    {EdgeCase::OneHotRows, "one_hot_rows"},
    {EdgeCase::SubnormalFill, "subnormal_fill"},
};

double sample(const InputSpec& spec, TrialRng& rng, double max_finite) {
  double x = 0.0;
  switch (spec.distribution) {
    case InputDistribution::StandardNormal:
      x = rng.normal();
      break;
    case InputDistribution::Uniform:
      x = spec.uniform_lo + (spec.uniform_hi - spec.uniform_lo) * rng.uniform01();
      break;
    case InputDistribution::LogNormal:
      x = std::exp(spec.lognormal_mu + spec.lognormal_sigma * rng.normal());
      break;
  }
  // Saturate so the sampled operand stays finite in the element format.
  x = std::clamp(x, -max_finite, max_finite);
  return quantize(x, spec.element_format);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, const InputSpec& spec, TrialRng& rng) {
  const double max_finite = format_properties(spec.element_format).max_finite;
  Matrix m(rows, cols);
  for (double& v : m.data) v = sample(spec, rng, max_finite);
  m.format_tag = spec.element_format;
  return m;
}

InputPair edge_case_input(const InputSpec& spec, EdgeCase which, TrialRng& rng) {
  const auto props = format_properties(spec.element_format);
  const auto& fmt = spec.element_format;
  Matrix a(spec.rows_a, spec.inner);
  Matrix b(spec.inner, spec.cols_b);
  switch (which) {
    case EdgeCase::Zeros:
      break;
    case EdgeCase::MaxQuarter: {
      const double v = quantize(props.max_finite / 4.0, fmt);
      std::fill(a.data.begin(), a.data.end(), v);
      std::fill(b.data.begin(), b.data.end(), v);
      break;
    }
    case EdgeCase::AlternatingLarge: {
      const double v = quantize(std::sqrt(props.max_finite) / 4.0, fmt);
      for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) a(i, k) = (k % 2 == 0) ? v : -v;
      std::fill(b.data.begin(), b.data.end(), v);
      break;
    }
    case EdgeCase::OneHotRows:
      for (std::size_t i = 0; i < a.rows; ++i) a(i, i % a.cols) = 1.0;
      b = random_matrix(spec.inner, spec.cols_b, spec, rng);
      break;
    case EdgeCase::SubnormalFill: {
      const std::uint64_t levels = (std::uint64_t{1} << std::min(fmt.mantissa_bits, 62)) - 1;
      auto fill = [&](Matrix& m) {
        for (double& v : m.data) {
          const double k = static_cast<double>(1 + rng.below(levels));
          v = (rng.next() & 1 ? -k : k) * props.min_subnormal;
        }
      };
      fill(a);
      fill(b);
      break;
    }
  }
  a.format_tag = fmt;
  b.format_tag = fmt;
  return {std::move(a), std::move(b)};
}

// Result slot for one trial.
struct TrialOutcome {
  double delta_1 = 0.0;
  double delta_2 = 0.0;
  std::optional<std::string> excluded;
  std::optional<std::string> fatal;
};

std::optional<std::string> non_finite(const Matrix& m, const std::string& who) {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!std::isfinite(m.data[i]))
      return who + " output non-finite at element " + std::to_string(i);
  return std::nullopt;
}

// Per-worker evaluation context; external clients are owned per worker.
class Evaluator {
 public:
  explicit Evaluator(const ExperimentConfig& cfg) : cfg_(cfg) {
    if (auto* ep = std::get_if<ExternalEndpoint>(&cfg.impl_1.kind))
      ext_1_ = std::make_unique<wire::ExternalImplementation>(*ep);
    if (auto* ep = std::get_if<ExternalEndpoint>(&cfg.impl_2.kind))
      ext_2_ = std::make_unique<wire::ExternalImplementation>(*ep);
  }

  TrialOutcome run(std::size_t trial) {
    TrialOutcome out;
    TrialRng rng(cfg_.seed, trial);
    const InputPair in = generate_input(cfg_.input, rng);
    Matrix y1;
    Matrix y2;
    try {
      y1 = evaluate(cfg_.impl_1, ext_1_.get(), trial, in);
      y2 = evaluate(cfg_.impl_2, ext_2_.get(), trial, in);
    } catch (const ProtocolError& e) {
      out.fatal = "trial " + std::to_string(trial) + ": " + e.what();
      return out;
    }
    const Matrix yo = matmul_oracle(in.a, in.b);
    if (auto why = non_finite(y1, "impl_1")) return excluded(std::move(out), *why);
    if (auto why = non_finite(y2, "impl_2")) return excluded(std::move(out), *why);
    if (auto why = non_finite(yo, "oracle")) return excluded(std::move(out), *why);
    try {
      out.delta_1 = evaluate_metric(cfg_.metric, y1, yo);
      out.delta_2 = evaluate_metric(cfg_.metric, y2, yo);
    } catch (const Error& e) {
      return excluded(std::move(out), std::string("metric: ") + e.what());
    }
    return out;
  }

 private:
  static TrialOutcome excluded(TrialOutcome out, std::string reason) {
    out.excluded = std::move(reason);
    return out;
  }

  static Matrix evaluate(const ImplementationHandle& impl, wire::ExternalImplementation* ext,
                         std::size_t trial, const InputPair& in) {
    if (ext) {
      Matrix y = ext->evaluate(trial, in.a, in.b);
      if (y.rows != in.a.rows || y.cols != in.b.cols)
        throw ProtocolError("implementation returned the wrong shape");
      return y;
    }
    const auto& kcfg = std::get<KernelConfig>(impl.kind);
    if (in.a.format_tag && *in.a.format_tag == kcfg.element_format)
      return matmul_emulated_serial(in.a, in.b, kcfg);
    return matmul_emulated_serial(quantize_matrix(in.a, kcfg.element_format),
                                  quantize_matrix(in.b, kcfg.element_format), kcfg);
  }

  const ExperimentConfig& cfg_;
  std::unique_ptr<wire::ExternalImplementation> ext_1_;
  std::unique_ptr<wire::ExternalImplementation> ext_2_;
};

DualDeltaRun collect(const ExperimentConfig& cfg, std::vector<TrialOutcome>& outcomes,
                     std::chrono::steady_clock::time_point start, int jobs) {
  for (const auto& o : outcomes)
    if (o.fatal) throw ProtocolError("run aborted at " + *o.fatal);

  RunMetadata meta;
  meta.seed = cfg.seed;
  meta.config_hash = config_hash(cfg);
  meta.requested_trials = cfg.num_tests;
  meta.jobs = jobs;
  std::vector<double> d1;
  std::vector<double> d2;
  std::vector<std::size_t> trials;
  d1.reserve(outcomes.size());
  d2.reserve(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].excluded) {
      meta.excluded.push_back({i, *outcomes[i].excluded});
      continue;
    }
    d1.push_back(outcomes[i].delta_1);
    d2.push_back(outcomes[i].delta_2);
    trials.push_back(i);
  }
  meta.valid = meta.excluded.size() * 100 <= cfg.num_tests;
  if (d1.empty()) throw Error("every trial was excluded; first reason: " + meta.excluded.front().reason);
  meta.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return DualDeltaRun{DeltaDistribution(std::move(d1), cfg.impl_1.label, cfg.metric),
                      DeltaDistribution(std::move(d2), cfg.impl_2.label, cfg.metric), std::move(trials),
                      std::move(meta)};
}

}  // namespace

std::string to_string(InputDistribution d) {
  switch (d) {
    case InputDistribution::Uniform:
      return "uniform";
    case InputDistribution::LogNormal:
      return "lognormal";
    case InputDistribution::StandardNormal:
      break;
  }
  return "standard_normal";
}

InputDistribution parse_distribution(std::string_view name) {
  if (name == "standard_normal") return InputDistribution::StandardNormal;
  if (name == "uniform") return InputDistribution::Uniform;
  if (name == "lognormal") return InputDistribution::LogNormal;
  throw Error("unknown distribution '" + std::string(name) +
              "' (expected standard_normal, uniform or lognormal)");
}

std::string to_string(EdgeCase e) {
  for (const auto& n : kEdgeCases)
    if (n.value == e) return std::string(n.name);
  return "?";
}

EdgeCase parse_edge_case(std::string_view name) {
  for (const auto& n : kEdgeCases)
    if (n.name == name) return n.value;
  throw Error("unknown edge case '" + std::string(name) +
              "' (expected zeros, max_quarter, alternating_large, one_hot_rows or subnormal_fill)");
}

std::vector<EdgeCase> all_edge_cases() {
  std::vector<EdgeCase> v;
  for (const auto& n : kEdgeCases) v.push_back(n.value);
  return v;
}

double TrialRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u;
  double v;
  double s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

void InputSpec::validate() const {
  if (rows_a == 0 || inner == 0 || cols_b == 0) throw ConfigError("input: dimensions must be positive");
  if (!(edge_case_rate >= 0.0 && edge_case_rate <= 1.0))
    throw ConfigError("input.edge_case_rate must be in [0, 1], got " + std::to_string(edge_case_rate));
  if (edge_case_rate > 0.0 && edge_cases.empty())
    throw ConfigError("input.edge_cases must not be empty when edge_case_rate > 0");
  if (distribution == InputDistribution::Uniform && !(uniform_lo < uniform_hi))
    throw ConfigError("input.uniform_lo must be less than input.uniform_hi");
  if (distribution == InputDistribution::LogNormal && !(lognormal_sigma > 0.0))
    throw ConfigError("input.lognormal_sigma must be positive");
}

void ExperimentConfig::validate() const {
  if (num_tests < 1) throw ConfigError("experiment.num_tests must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("experiment.alpha must be in (0, 1), got " + std::to_string(alpha));
  input.validate();
  for (const auto* impl : {&impl_1, &impl_2}) {
    if (const auto* k = std::get_if<KernelConfig>(&impl->kind)) {
      if (k->block_size < 1) throw ConfigError(impl->label + ": block_size must be >= 1");
    } else {
      const auto& ep = std::get<ExternalEndpoint>(impl->kind);
      if (ep.command.empty()) throw ConfigError(impl->label + ": external command is empty");
      if (!(ep.timeout_s > 0.0)) throw ConfigError(impl->label + ": timeout_s must be positive");
    }
  }
}

InputPair generate_input(const InputSpec& spec, TrialRng& rng) {
  if (spec.edge_case_rate > 0.0 && rng.uniform01() < spec.edge_case_rate) {
    const EdgeCase which = spec.edge_cases[rng.below(spec.edge_cases.size())];
    return edge_case_input(spec, which, rng);
  }
  Matrix a = random_matrix(spec.rows_a, spec.inner, spec, rng);
  Matrix b = random_matrix(spec.inner, spec.cols_b, spec, rng);
  return {std::move(a), std::move(b)};
}

DualDeltaRun run_dual_delta(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<TrialOutcome> outcomes(cfg.num_tests);
#ifdef DDT_HAVE_OPENMP
  const int jobs = options.jobs > 0 ? options.jobs : omp_get_max_threads();
  // Workers start their external clients before the loop so startup
  // failures surface once, not per trial.
  std::vector<std::unique_ptr<Evaluator>> evaluators(static_cast<std::size_t>(jobs));
  for (auto& e : evaluators) e = std::make_unique<Evaluator>(cfg);
  const auto n = static_cast<std::ptrdiff_t>(cfg.num_tests);
  std::atomic<bool> aborted{false};
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    if (aborted.load(std::memory_order_relaxed)) continue;
    auto& ev = *evaluators[static_cast<std::size_t>(omp_get_thread_num())];
    auto& slot = outcomes[static_cast<std::size_t>(t)];
    try {
      slot = ev.run(static_cast<std::size_t>(t));
    } catch (const std::exception& e) {
      slot.fatal = "trial " + std::to_string(t) + ": " + e.what();
    }
    if (slot.fatal) aborted.store(true, std::memory_order_relaxed);
  }
  return collect(cfg, outcomes, start, jobs);
#else
  (void)options;
  Evaluator ev(cfg);
  for (std::size_t t = 0; t < cfg.num_tests; ++t) outcomes[t] = ev.run(t);
  return collect(cfg, outcomes, start, 1);
#endif
}

DualDeltaRun run_dual_delta_serial(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<TrialOutcome> outcomes(cfg.num_tests);
  Evaluator ev(cfg);
  for (std::size_t t = 0; t < cfg.num_tests; ++t) {
    outcomes[t] = ev.run(t);
    if (outcomes[t].fatal) break;
  }
  return collect(cfg, outcomes, start, 1);
}

}  // namespace ddt
