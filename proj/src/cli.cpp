#include "ddt/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ddt/config.hpp"
#include "ddt/error.hpp"
#include "ddt/harness.hpp"
#include "ddt/report.hpp"
#include "ddt/verdict.hpp"

namespace ddt {
namespace {

struct RunFlags {
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::vector<std::string> sets;
  bool fail_on_regression = false;
  bool no_timestamp = false;
  std::string formats = "json,csv,svg";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string default_out_dir() {
  if (const char* env = std::getenv("DDT_OUT_DIR"); env && *env) return env;
  return "ddt_out";
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--out", f.out_dir, "Output directory (default: $DDT_OUT_DIR or ./ddt_out)");
  cmd->add_option("--seed", f.seed, "Override experiment.seed");
  cmd->add_option("--jobs", f.jobs, "Maximum worker threads (default: all)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--set", f.sets, "Override a config field, section.key=value (repeatable)");
  cmd->add_flag("--fail-on-regression", f.fail_on_regression,
                "Exit with status 2 when impl_2 is found more accurate than impl_1");
  cmd->add_flag("--no-timestamp", f.no_timestamp, "Omit timestamp and wall time for reproducible output");
  cmd->add_option("--formats", f.formats, "Comma-separated subset of json,csv,svg");
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

int run_experiment(std::string_view text, const RunFlags& f, std::ostream& out, std::ostream& err) {
  std::vector<ConfigOverride> overrides;
  for (const auto& s : f.sets) overrides.push_back(parse_override(s));
  if (f.seed) overrides.push_back({"experiment.seed", std::to_string(*f.seed)});
  const ExperimentConfig cfg = parse_config(text, overrides);
  const OutputFormats formats = parse_formats(f.formats);

  const DualDeltaRun run = run_dual_delta(cfg, RunOptions{f.jobs});
  const Report report = build_report(cfg, run, ReportOptions{100, !f.no_timestamp});
  const std::string dir = f.out_dir.empty() ? default_out_dir() : f.out_dir;
  const auto written = render_report(report, dir, formats);

  out << cfg.impl_1.label << ": Mean Error = " << sci(report.summary_1.mean)
      << ", Std = " << sci(report.summary_1.std) << "\n";
  out << cfg.impl_2.label << ": Mean Error = " << sci(report.summary_2.mean)
      << ", Std = " << sci(report.summary_2.std) << "\n";
  if (report.comparison.mean.value)
    out << "mean ratio impl_1/impl_2 = " << *report.comparison.mean.value << "\n";
  for (const auto& e : report.verdict.evidence)
    out << "  " << e.role << ": " << e.result.method << " (" << to_string(e.result.alternative)
        << ") statistic = " << e.result.statistic << ", p = " << e.result.p_value << "\n";
  out << "verdict: accuracy = " << to_string(report.verdict.accuracy)
      << ", stability = " << to_string(report.verdict.stability) << " (alpha = " << cfg.alpha << ")\n";
  out << "trials used: " << run.delta_1.size() << " of " << cfg.num_tests << "\n";
  if (!written.empty()) out << "artifacts written to " << dir << "\n";

  if (!run.metadata.valid) {
    err << "error: run invalid, " << run.metadata.excluded.size() << " of " << cfg.num_tests
        << " trials excluded (limit 1%); first: trial " << run.metadata.excluded.front().trial << ": "
        << run.metadata.excluded.front().reason << "\n";
    return kExitError;
  }
  if (f.fail_on_regression && report.verdict.accuracy == AccuracyVerdict::Impl2MoreAccurate) {
    err << "regression: " << cfg.impl_1.label << " is less accurate than " << cfg.impl_2.label << "\n";
    return kExitRegression;
  }
  return kExitOk;
}

void list_kernels(std::ostream& out) {
  out << "builtin kernel: emulated-precision matmul\n"
      << "  formats:    binary16 bfloat16 fp8_e4m3 fp8_e5m2 binary32 binary64 (e=E,m=M)\n"
      << "  reductions: sequential blocked pairwise\n"
      << "  oracle:     binary64 sequential matmul\n"
      << "metrics:      max_hybrid normwise_rel_l2 normwise_rel_linf\n"
      << "inputs:       standard_normal uniform lognormal\n"
      << "edge cases:   zeros max_quarter alternating_large one_hot_rows subnormal_fill\n"
      << "presets:     ";
  for (const auto& p : preset_names()) out << " " << p;
  out << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual-delta accuracy testing of numerical kernels against a binary64 oracle", "ddt"};
  app.require_subcommand(1);

  RunFlags run_flags;
  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("--config", config_path, "Experiment config file")->required();
  add_run_flags(run, run_flags);

  RunFlags preset_flags;
  std::string preset_name;
  auto* preset = app.add_subcommand("preset", "Run a bundled preset (case1, case2, case2_fixed)");
  preset->add_option("name", preset_name, "Preset name")->required();
  add_run_flags(preset, preset_flags);

  std::string validate_path;
  std::vector<std::string> validate_sets;
  auto* validate = app.add_subcommand("validate", "Parse and validate a config file");
  validate->add_option("--config", validate_path, "Experiment config file")->required();
  validate->add_option("--set", validate_sets, "Override a config field, section.key=value");

  auto* list = app.add_subcommand("list-kernels", "List builtin kernels, formats and presets");
  auto* selftest = app.add_subcommand("selftest", "Check the statistics against exact enumeration oracles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    if (*run) return run_experiment(read_file(config_path), run_flags, out, err);
    if (*preset) return run_experiment(preset_text(preset_name), preset_flags, out, err);
    if (*validate) {
      std::vector<ConfigOverride> overrides;
      for (const auto& s : validate_sets) overrides.push_back(parse_override(s));
      parse_config(read_file(validate_path), overrides);
      out << "OK\n";
      return kExitOk;
    }
    if (*list) {
      list_kernels(out);
      return kExitOk;
    }
    if (*selftest) return run_selftest(out) ? kExitOk : kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace ddt
