// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Thresholds are fixed here and must not be relaxed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "ddt/config.hpp"
#include "ddt/harness.hpp"
#include "ddt/minifloat.hpp"
#include "ddt/report.hpp"
#include "ddt/stats.hpp"
#include "ddt/verdict.hpp"
#include "ddt/wire.hpp"
#include "oracles.hpp"

using namespace ddt;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report_line(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

// Runs a criterion; an escaping exception counts as a failure.
void criterion(const std::string& name, const std::function<bool(std::ostringstream&)>& body) {
  std::ostringstream detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail << " exception: " << e.what();
  }
  report_line(name, ok, detail.str());
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ddt_acceptance_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct PresetOutcome {
  Report report;
  double seconds;
};

PresetOutcome run_preset(const std::string& name, int jobs) {
  const auto cfg = parse_config(preset_text(name));
  const auto t0 = Clock::now();
  const auto run = run_dual_delta(cfg, {jobs});
  auto report = build_report(cfg, run, {100, false});
  return {std::move(report), seconds_since(t0)};
}

const TestResult* find_test(const Report& r, const std::string& method, Alternative alt) {
  for (const auto& t : r.tests)
    if (t.result && t.result->method == method && t.result->alternative == alt) return &*t.result;
  return nullptr;
}

double mean_ratio(const Report& r) { return r.summary_1.mean / r.summary_2.mean; }

void case1() {
  criterion("case1 well-behaved kernels are equivalent", [](std::ostringstream& d) {
    const auto o = run_preset("case1", 1);
    const auto& r = o.report;
    const double m1 = r.summary_1.mean, m2 = r.summary_2.mean;
    const double rel = std::fabs(m1 - m2) / m2;
    d << "mean_1=" << m1 << " mean_2=" << m2 << " rel_diff=" << rel
      << " verdict=" << to_string(r.verdict.accuracy) << " time=" << o.seconds << "s (jobs 1)";
    return m1 >= 1e-4 && m1 <= 1e-3 && m2 >= 1e-4 && m2 <= 1e-3 && rel <= 0.1 &&
           r.verdict.accuracy == AccuracyVerdict::Equivalent && r.verdict.alpha == 0.01 && o.seconds <= 60.0;
  });
}

void case2() {
  criterion("case2 binary16 accumulation is detected as a regression", [](std::ostringstream& d) {
    const auto o = run_preset("case2", 0);
    const auto& r = o.report;
    const auto* ks = find_test(r, "ks_two_sample", Alternative::TwoSided);
    const auto* wx = find_test(r, "wilcoxon_signed_rank", Alternative::Greater);
    if (!ks || !wx) {
      d << "missing KS or one-sided Wilcoxon in the battery";
      return false;
    }
    d << "ratio=" << mean_ratio(r) << " ks_p=" << ks->p_value << " wilcoxon_greater_p=" << wx->p_value
      << " verdict=" << to_string(r.verdict.accuracy) << " time=" << o.seconds << "s";
    return mean_ratio(r) >= 10.0 && ks->p_value < 1e-6 && wx->p_value < 1e-6 &&
           r.verdict.accuracy == AccuracyVerdict::Impl2MoreAccurate && o.seconds <= 300.0;
  });

  criterion("case2 --fail-on-regression exits 2", [](std::ostringstream& d) {
    const auto dir = scratch("case2_cli");
    const auto t0 = Clock::now();
    const int code = shell(std::string("'") + DDT_CLI_PATH + "' preset case2 --fail-on-regression --formats json --out '" +
                           dir.string() + "' > /dev/null 2>&1");
    const double secs = seconds_since(t0);
    fs::remove_all(dir);
    d << "exit=" << code << " time=" << secs << "s";
    return code == 2 && secs <= 300.0;
  });
}

void case2_fixed() {
  criterion("case2_fixed binary32 accumulation restores parity", [](std::ostringstream& d) {
    const auto o = run_preset("case2_fixed", 0);
    const auto& r = o.report;
    d << "ratio=" << mean_ratio(r) << " verdict=" << to_string(r.verdict.accuracy);
    return r.verdict.accuracy == AccuracyVerdict::Equivalent && mean_ratio(r) >= 0.9 && mean_ratio(r) <= 1.1;
  });
}

void statistical_oracles() {
  criterion("exact signed-rank and sign-test p-values match enumeration", [](std::ostringstream& d) {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> nd;
    int mismatches = 0;
    for (int s = 0; s < 100; ++s) {
      const std::size_t n_eff = 1 + s % 12;
      std::vector<double> x, y, diffs;
      for (std::size_t i = 0; i < n_eff; ++i) {
        const double base = std::fabs(nd(rng)) + 1.0, diff = nd(rng);
        x.push_back(base + diff);
        y.push_back(base);
        diffs.push_back(x.back() - y.back());
      }
      for (int z = 0; z < s % 3; ++z) {  // zero differences are dropped
        x.push_back(0.5);
        y.push_back(0.5);
      }
      const auto w = oracle::wilcoxon_enumerate(diffs);
      const auto sg = oracle::sign_enumerate(diffs);
      const auto two = [](const oracle::TwoTails& t) { return std::min(1.0, 2.0 * std::min(t.greater, t.less)); };
      const auto wg = wilcoxon_signed_rank(x, y, Alternative::Greater);
      const auto wl = wilcoxon_signed_rank(x, y, Alternative::Less);
      const auto wt = wilcoxon_signed_rank(x, y, Alternative::TwoSided);
      const auto sgg = sign_test(x, y, Alternative::Greater);
      const auto sgl = sign_test(x, y, Alternative::Less);
      const auto sgt = sign_test(x, y, Alternative::TwoSided);
      const bool ok = wg.mode == TestMode::Exact && wg.n_effective == n_eff && wg.p_value == w.greater &&
                      wl.p_value == w.less && wt.p_value == two(w) && wg.statistic == w.observed &&
                      sgg.p_value == sg.greater && sgl.p_value == sg.less && sgt.p_value == two(sg) &&
                      sgg.statistic == sg.observed;
      if (!ok) ++mismatches;
    }
    d << "100 samples, n_effective 1..12, mismatches=" << mismatches;
    return mismatches == 0;
  });

  criterion("KS statistic matches brute-force ECDF supremum", [](std::ostringstream& d) {
    std::mt19937_64 rng(7);
    std::exponential_distribution<double> ex(1.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> a(1 + rng() % 80), b(1 + rng() % 80);
      // Coarse rounding on some pairs forces ties within and across samples.
      const bool coarse = t % 4 == 0;
      for (auto& v : a) v = coarse ? std::round(ex(rng) * 4) : ex(rng);
      for (auto& v : b) v = coarse ? std::round(ex(rng) * 4) : ex(rng) * 1.2;
      worst = std::max(worst, std::fabs(ks_two_sample(a, b).statistic - oracle::ks_brute(a, b)));
    }
    d << "1000 pairs, max |D - D_brute| = " << worst;
    return worst <= 1e-15;
  });

  criterion("Shapiro-Wilk W agrees with golden reference", [](std::ostringstream& d) {
    const auto ref = nlohmann::json::parse(oracle::read_file(std::string(DDT_TEST_DATA_DIR) + "/stats_reference.json"));
    double worst = 0.0;
    std::size_t count = 0;
    for (const auto& c : ref["shapiro_wilk"]) {
      const auto v = c["values"].get<std::vector<double>>();
      worst = std::max(worst, std::fabs(shapiro_wilk(v).statistic - c["W"].get<double>()));
      ++count;
    }
    d << count << " samples, max |W - W_ref| = " << worst;
    return count >= 10 && worst <= 1e-3;
  });
}

void calibration() {
  // Identical generators for both samples; every test should reject at its
  // nominal size. Shapiro-Wilk tests normality, so it gets normal samples.
  constexpr int kReps = 2000;
  constexpr std::size_t kN = 100;
  constexpr double kAlpha = 0.05;
  std::mt19937_64 rng(31337);
  std::exponential_distribution<double> ex(1.0);
  std::normal_distribution<double> nd;
  struct Rate {
    const char* name;
    int rejections = 0;
  };
  Rate rates[] = {{"ks_two_sample"}, {"wilcoxon_signed_rank"}, {"sign_test"},
                  {"paired_t_test"}, {"shapiro_wilk"},         {"brown_forsythe"}};
  for (int rep = 0; rep < kReps; ++rep) {
    std::vector<double> x(kN), y(kN), z(kN);
    for (auto& v : x) v = ex(rng);
    for (auto& v : y) v = ex(rng);
    for (auto& v : z) v = nd(rng);
    const double p[] = {ks_two_sample(x, y).p_value,
                        wilcoxon_signed_rank(x, y, Alternative::Greater).p_value,
                        sign_test(x, y, Alternative::Greater).p_value,
                        paired_t_test(x, y, Alternative::Greater).p_value,
                        shapiro_wilk(z).p_value,
                        variance_test(x, y).test.p_value};
    for (std::size_t i = 0; i < std::size(rates); ++i)
      if (p[i] < kAlpha) ++rates[i].rejections;
  }
  for (const auto& r : rates) {
    const double rate = static_cast<double>(r.rejections) / kReps;
    std::ostringstream d;
    d << "rejection rate " << rate << " at alpha 0.05 over 2000 x n=100";
    report_line(std::string("calibration ") + r.name, rate >= 0.03 && rate <= 0.07, d.str());
  }
}

double random_double(std::mt19937_64& rng) {
  std::uint64_t b = rng();
  if (rng() % 4 != 0) b = (b & 0x800FFFFFFFFFFFFFULL) | ((1023 - 40 + rng() % 80) << 52);
  return oracle::from_bits(b);
}

void minifloat() {
  criterion("all binary16 bit patterns round-trip through quantize", [](std::ostringstream& d) {
    int bad = 0;
    for (std::uint32_t p = 0; p < 65536; ++p) {
      const double x = oracle::decode_binary16(static_cast<std::uint16_t>(p));
      const double q = quantize(x, kBinary16);
      if (std::isnan(x) ? !std::isnan(q) : oracle::bits(q) != oracle::bits(x)) ++bad;
    }
    d << "65536 patterns, failures=" << bad;
    return bad == 0;
  });

  criterion("quantize idempotence, monotonicity and sign symmetry", [](std::ostringstream& d) {
    std::mt19937_64 rng(99);
    const FloatFormat formats[] = {kBinary16, kBFloat16, kFp8E4M3, kFp8E5M2, kBinary32};
    std::size_t checks = 0, bad = 0;
    for (const auto& f : formats) {
      for (int i = 0; i < 1000000; ++i) {
        const double x = random_double(rng), y = random_double(rng);
        const double qx = quantize(x, f), qy = quantize(y, f);
        if (!std::isnan(x)) {
          if (oracle::bits(quantize(qx, f)) != oracle::bits(qx)) ++bad;
          if (oracle::bits(quantize(-x, f)) != oracle::bits(-qx)) ++bad;
        }
        if (!std::isnan(x) && !std::isnan(y) && x <= y && !(qx <= qy)) ++bad;
        ++checks;
      }
    }
    d << checks << " random inputs over 5 formats, failures=" << bad;
    return bad == 0 && checks >= 1000000;
  });
}

void determinism() {
  criterion("run output is byte-identical across repeats and job counts", [](std::ostringstream& d) {
    const auto dir = scratch("determinism");
    const auto cfg = dir / "exp.conf";
    std::ofstream(cfg) << preset_text("case1");
    std::vector<fs::path> outs;
    for (int jobs : {1, 8}) {
      for (int rep = 0; rep < 2; ++rep) {
        const auto out = dir / ("jobs" + std::to_string(jobs) + "_" + std::to_string(rep));
        const int code = shell(std::string("'") + DDT_CLI_PATH + "' run --config '" + cfg.string() +
                               "' --no-timestamp --jobs " + std::to_string(jobs) + " --out '" + out.string() +
                               "' > /dev/null 2>&1");
        if (code != 0) {
          d << "run exited " << code;
          return false;
        }
        outs.push_back(out);
      }
    }
    bool same = true;
    for (const char* f : {"report.json", "deltas.csv"}) {
      const auto ref = oracle::read_file((outs[0] / f).string());
      for (const auto& o : outs) same = same && !ref.empty() && oracle::read_file((o / f).string()) == ref;
    }
    fs::remove_all(dir);
    d << "4 runs (jobs 1 and 8, twice each) of a 500-trial config";
    return same;
  });
}

void codec() {
  criterion("wire codec is bijective on non-NaN doubles", [](std::ostringstream& d) {
    std::mt19937_64 rng(4);
    std::size_t bad = 0, checked = 0, nans = 0;
    while (checked < 1000000) {
      const std::uint64_t p = rng() % 8 == 0 ? (rng() & 0x800FFFFFFFFFFFFFULL) | (rng() % 2 ? 0x7FF0000000000000ULL : 0) : rng();
      const double x = oracle::from_bits(p);
      if (std::isnan(x)) {
        bool threw = false;
        try {
          wire::encode_matrix(Matrix(1, 1, std::vector<double>{x}));
        } catch (const std::exception&) {
          threw = true;
        }
        if (!threw) ++bad;
        ++nans;
        continue;
      }
      const auto hex = wire::encode_double(x);
      if (hex.size() != 16 || oracle::bits(wire::decode_double(hex)) != p) ++bad;
      ++checked;
    }
    d << checked << " round trips, " << nans << " NaN rejections checked, failures=" << bad;
    return bad == 0;
  });

  criterion("wire codec decodes the golden file", [](std::ostringstream& d) {
    const auto lines = oracle::read_lines(std::string(DDT_TEST_DATA_DIR) + "/codec_golden.txt");
    std::size_t bad = 0;
    for (const auto& line : lines) {
      std::istringstream in(line);
      std::string hex, repr;
      in >> hex >> repr;
      const double got = wire::decode_double(hex);
      if (oracle::bits(got) != oracle::bits(std::strtod(repr.c_str(), nullptr)) || wire::encode_double(got) != hex)
        ++bad;
    }
    d << lines.size() << " lines, failures=" << bad;
    return lines.size() == 1000 && bad == 0;
  });
}

}  // namespace

int main() {
  case1();
  case2();
  case2_fixed();
  statistical_oracles();
  calibration();
  minifloat();
  determinism();
  codec();
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
