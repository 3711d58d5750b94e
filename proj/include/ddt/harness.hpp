#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ddt/kernels.hpp"
#include "ddt/metrics.hpp"
#include "ddt/rng.hpp"
#include "ddt/stats.hpp"

namespace ddt {

enum class InputDistribution { StandardNormal, Uniform, LogNormal };

enum class EdgeCase { Zeros, MaxQuarter, AlternatingLarge, OneHotRows, SubnormalFill };

std::string to_string(InputDistribution d);
InputDistribution parse_distribution(std::string_view name);
std::string to_string(EdgeCase e);
EdgeCase parse_edge_case(std::string_view name);
std::vector<EdgeCase> all_edge_cases();

/// Distribution of the operand pair (A, B) with A: rows_a x inner and
/// B: inner x cols_b.
struct InputSpec {
  std::size_t rows_a = 64;
  std::size_t inner = 64;
  std::size_t cols_b = 64;
  InputDistribution distribution = InputDistribution::StandardNormal;
  double uniform_lo = -1.0;
  double uniform_hi = 1.0;
  double lognormal_mu = 0.0;
  double lognormal_sigma = 1.0;
  FloatFormat element_format = kBinary16;
  double edge_case_rate = 0.0;
  std::vector<EdgeCase> edge_cases = all_edge_cases();

  void validate() const;
};

/// An implementation hosted in a child process speaking the wire protocol.
struct ExternalEndpoint {
  std::string command;
  double timeout_s = 30.0;
};

struct ImplementationHandle {
  std::string label;
  std::variant<KernelConfig, ExternalEndpoint> kind;

  bool is_external() const { return std::holds_alternative<ExternalEndpoint>(kind); }
};

struct ExperimentConfig {
  ImplementationHandle impl_1{"impl_1", KernelConfig{}};
  ImplementationHandle impl_2{"impl_2", KernelConfig{}};
  InputSpec input;
  MetricKind metric = MetricKind::max_hybrid();
  std::size_t num_tests = 1000;
  std::uint64_t seed = 0;
  double alpha = 0.01;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct InputPair {
  Matrix a;
  Matrix b;
};

/// Draws one operand pair; every element is representable in
/// spec.element_format.
InputPair generate_input(const InputSpec& spec, TrialRng& rng);

struct ExcludedTrial {
  std::size_t trial = 0;
  std::string reason;
};

struct RunMetadata {
  std::uint64_t seed = 0;
  std::string config_hash;
  double wall_time_s = 0.0;
  std::size_t requested_trials = 0;
  std::vector<ExcludedTrial> excluded;
  bool valid = true;  // false when more than 1% of trials were excluded
  int jobs = 1;
};

struct DualDeltaRun {
  DeltaDistribution delta_1;
  DeltaDistribution delta_2;
  std::vector<std::size_t> trials;  // trial index of each retained pair
  RunMetadata metadata;
};

struct RunOptions {
  int jobs = 0;  // <= 0: OpenMP default
};

/// Runs num_tests trials in parallel. Each trial evaluates both
/// implementations and the binary64 oracle on one input and appends the
/// two metric values at the trial's index. Trials with non-finite outputs
/// or undefined metrics are dropped from both distributions and logged.
/// Throws on protocol failures of external implementations.
DualDeltaRun run_dual_delta(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Single-threaded reference for run_dual_delta; same results bitwise.
DualDeltaRun run_dual_delta_serial(const ExperimentConfig& cfg);

}  // namespace ddt
