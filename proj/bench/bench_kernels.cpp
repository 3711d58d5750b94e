// Serial reference vs OpenMP kernels. Run with --benchmark_filter=... as usual.

#include <benchmark/benchmark.h>

#include "ddt/harness.hpp"
#include "ddt/kernels.hpp"

namespace {

ddt::InputPair make_input(std::size_t m, std::size_t k, std::size_t n) {
  ddt::InputSpec spec;
  spec.rows_a = m;
  spec.inner = k;
  spec.cols_b = n;
  ddt::TrialRng rng(7, 0);
  return ddt::generate_input(spec, rng);
}

ddt::KernelConfig fp16_acc(const ddt::FloatFormat& acc) {
  ddt::KernelConfig cfg;
  cfg.accumulate_format = acc;
  return cfg;
}

void BM_MatmulSerial(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto in = make_input(64, k, 64);
  const auto cfg = fp16_acc(ddt::kBinary16);
  for (auto _ : state) benchmark::DoNotOptimize(ddt::matmul_emulated_serial(in.a, in.b, cfg));
  state.SetItemsProcessed(state.iterations() * 64 * 64 * static_cast<std::int64_t>(k));
}

void BM_MatmulOpenMP(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto in = make_input(64, k, 64);
  const auto cfg = fp16_acc(ddt::kBinary16);
  for (auto _ : state) benchmark::DoNotOptimize(ddt::matmul_emulated(in.a, in.b, cfg));
  state.SetItemsProcessed(state.iterations() * 64 * 64 * static_cast<std::int64_t>(k));
}

void BM_MatmulOracle(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const auto in = make_input(64, k, 64);
  for (auto _ : state) benchmark::DoNotOptimize(ddt::matmul_oracle(in.a, in.b));
  state.SetItemsProcessed(state.iterations() * 64 * 64 * static_cast<std::int64_t>(k));
}

ddt::ExperimentConfig harness_config() {
  ddt::ExperimentConfig cfg;
  cfg.num_tests = 32;
  cfg.seed = 1;
  cfg.impl_1 = {"acc16", fp16_acc(ddt::kBinary16)};
  cfg.impl_2 = {"acc32", fp16_acc(ddt::kBinary32)};
  return cfg;
}

void BM_HarnessSerial(benchmark::State& state) {
  const auto cfg = harness_config();
  for (auto _ : state) benchmark::DoNotOptimize(ddt::run_dual_delta_serial(cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.num_tests));
}

void BM_HarnessOpenMP(benchmark::State& state) {
  const auto cfg = harness_config();
  for (auto _ : state)
    benchmark::DoNotOptimize(ddt::run_dual_delta(cfg, {static_cast<int>(state.range(0))}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.num_tests));
}

}  // namespace

BENCHMARK(BM_MatmulSerial)->Arg(64)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatmulOpenMP)->Arg(64)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatmulOracle)->Arg(64)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HarnessSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HarnessOpenMP)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
