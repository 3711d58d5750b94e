#include <gtest/gtest.h>

#include <charconv>
#include <filesystem>
#include <random>
#include <sstream>
#include <unistd.h>

#include "ddt/error.hpp"
#include "ddt/report.hpp"
#include "oracles.hpp"

using namespace ddt;
namespace fs = std::filesystem;
using Vec = std::vector<double>;

namespace {

ExperimentConfig tiny_config(std::size_t n) {
  ExperimentConfig cfg;
  cfg.input.rows_a = 4;
  cfg.input.inner = 16;
  cfg.input.cols_b = 4;
  cfg.num_tests = n;
  cfg.seed = 3;
  KernelConfig narrow;
  narrow.accumulate_format = kBinary16;
  cfg.impl_1 = {"narrow", narrow};
  cfg.impl_2 = {"wide", KernelConfig{}};
  return cfg;
}

Report tiny_report(std::size_t n) {
  const auto cfg = tiny_config(n);
  return build_report(cfg, run_dual_delta(cfg), {.histogram_bins = 10, .timestamp = false});
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ddt_report_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::size_t sum(const std::vector<std::size_t>& v) {
  std::size_t s = 0;
  for (auto x : v) s += x;
  return s;
}

}  // namespace

TEST(Histogram, Examples) {
  Vec ten(10);
  for (int i = 0; i < 10; ++i) ten[i] = i;
  const auto h = histogram_shared_bins(ten, ten, 10);
  EXPECT_EQ(h.counts_1, h.counts_2);
  EXPECT_EQ(h.bin_edges.size(), 11u);
  EXPECT_EQ(sum(h.counts_1), 10u);

  const auto two = histogram_shared_bins(Vec{0.0}, Vec{1.0}, 2);
  EXPECT_EQ(two.counts_1, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(two.counts_2, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(two.bin_edges, (Vec{0.0, 0.5, 1.0}));

  const auto flat = histogram_shared_bins(Vec{3, 3, 3}, Vec{3, 3}, 100);
  ASSERT_EQ(flat.bin_edges.size(), 2u);
  EXPECT_GT(flat.bin_edges[1], flat.bin_edges[0]);
  EXPECT_EQ(flat.counts_1, (std::vector<std::size_t>{3}));
  EXPECT_EQ(flat.counts_2, (std::vector<std::size_t>{2}));

  EXPECT_THROW(histogram_shared_bins(Vec{}, Vec{1.0}), Error);
  EXPECT_THROW(histogram_shared_bins(Vec{1.0}, Vec{1.0}, 0), Error);
}

TEST(Histogram, ConservationAndBinning) {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> ex(3.0);
  for (int t = 0; t < 300; ++t) {
    Vec a(1 + rng() % 200), b(1 + rng() % 200);
    for (auto& x : a) x = ex(rng);
    for (auto& x : b) x = (t % 3 == 0) ? std::round(ex(rng) * 8) / 8 : ex(rng);
    const std::size_t nbins = 1 + rng() % 120;
    const auto h = histogram_shared_bins(a, b, nbins);
    ASSERT_EQ(sum(h.counts_1), a.size());
    ASSERT_EQ(sum(h.counts_2), b.size());
    for (std::size_t i = 1; i < h.bin_edges.size(); ++i) ASSERT_GT(h.bin_edges[i], h.bin_edges[i - 1]);
    // Direct count against the edges: half-open bins, last bin closed.
    const std::size_t bins = h.bin_edges.size() - 1;
    for (std::size_t i = 0; i < bins; ++i) {
      std::size_t c = 0;
      for (double x : a)
        if (x >= h.bin_edges[i] && (x < h.bin_edges[i + 1] || (i + 1 == bins && x <= h.bin_edges[i + 1]))) ++c;
      ASSERT_EQ(c, h.counts_1[i]) << "bin " << i;
    }
  }
}

TEST(QQ, Examples) {
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> ex(1.0);
  Vec a(57);
  for (auto& x : a) x = ex(rng);
  for (const auto& p : qq_points(a, a)) EXPECT_EQ(p.q1, p.q2);
  Vec doubled = a;
  for (auto& x : doubled) x *= 2;
  const auto pts = qq_points(a, doubled);
  EXPECT_EQ(pts.size(), 57u);
  for (const auto& p : pts) EXPECT_NEAR(p.q2, 2 * p.q1, 1e-12 * (1 + p.q1));
  for (std::size_t i = 1; i < pts.size(); ++i) {
    EXPECT_LE(pts[i - 1].q1, pts[i].q1);
    EXPECT_LE(pts[i - 1].q2, pts[i].q2);
  }
  const auto single = qq_points(Vec{0.25}, Vec{4.0});
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].q1, 0.25);
  EXPECT_EQ(single[0].q2, 4.0);
  EXPECT_EQ(qq_points(Vec{1, 2, 3}, Vec{1, 2, 3, 4, 5, 6}).size(), 3u);
  EXPECT_THROW(qq_points(Vec{}, Vec{1.0}), Error);
}

TEST(Report, JsonStructure) {
  const auto r = tiny_report(30);
  const auto j = report_to_json(r);
  EXPECT_EQ(j["schema_version"], "1.0");
  EXPECT_FALSE(j.contains("generated_at"));
  EXPECT_FALSE(j["run"].contains("wall_time_s"));
  EXPECT_EQ(j["run"]["used_trials"], 30);
  EXPECT_EQ(j["metric"], "max_hybrid");
  EXPECT_EQ(j["implementations"]["impl_1"]["label"], "narrow");
  EXPECT_EQ(j["tests"].size(), 8u);
  for (const auto& t : j["tests"]) {
    if (!t.contains("result")) continue;
    const double p = t["result"]["p_value"].get<double>();
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
  EXPECT_EQ(j["scatter_points"].size(), 30u);
  EXPECT_EQ(j["qq_points"].size(), 30u);
  EXPECT_EQ(j["histogram"]["bin_edges"].size(), 11u);
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(j["verdict"].contains("caveats"));

  const auto cfg = tiny_config(30);
  const auto stamped = build_report(cfg, run_dual_delta(cfg));
  ASSERT_TRUE(stamped.timestamp.has_value());
  EXPECT_TRUE(report_to_json(stamped).contains("generated_at"));
}

TEST(Report, NonFiniteNumbersBecomeStrings) {
  auto r = tiny_report(25);
  r.comparison.mean = Ratio{std::nullopt, false};
  r.comparison.p99 = Ratio{std::nullopt, true};
  const auto j = report_to_json(r);
  EXPECT_EQ(j["comparison"]["mean_ratio"], "inf");
  EXPECT_EQ(j["comparison"]["p99_ratio"], "undefined");
}

TEST(Report, CsvRoundTripsBitwise) {
  const auto r = tiny_report(40);
  const std::string csv = deltas_csv(r);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "trial,delta_1,delta_2");
  std::size_t i = 0;
  while (std::getline(in, line)) {
    const auto c1 = line.find(','), c2 = line.rfind(',');
    const std::string t = line.substr(0, c1), a = line.substr(c1 + 1, c2 - c1 - 1), b = line.substr(c2 + 1);
    double va = 0, vb = 0;
    std::from_chars(a.data(), a.data() + a.size(), va);
    std::from_chars(b.data(), b.data() + b.size(), vb);
    ASSERT_EQ(std::stoul(t), r.trials[i]);
    ASSERT_EQ(oracle::bits(va), oracle::bits(r.delta_1[i]));
    ASSERT_EQ(oracle::bits(vb), oracle::bits(r.delta_2[i]));
    ++i;
  }
  EXPECT_EQ(i, 40u);
}

TEST(Render, FormatsAndLineCounts) {
  const auto r = tiny_report(3);
  const auto none = scratch("none");
  EXPECT_TRUE(render_report(r, none, OutputFormats{}).empty());
  EXPECT_FALSE(fs::exists(none));

  const auto dir = scratch("jc");
  const auto written = render_report(r, dir, parse_formats("json,csv"));
  EXPECT_EQ(written.size(), 2u);
  const auto csv = oracle::read_file((dir / "deltas.csv").string());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_FALSE(fs::exists(dir / "histogram.svg"));
  for (const auto& e : fs::directory_iterator(dir)) EXPECT_NE(e.path().extension(), ".tmp");

  const auto all = scratch("all");
  EXPECT_EQ(render_report(r, all, parse_formats("json,csv,svg")).size(), 5u);
  for (const char* name : {"histogram.svg", "qq.svg", "scatter.svg"}) {
    const auto svg = oracle::read_file((all / name).string());
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u) << name;
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_EQ(svg.find("href"), std::string::npos);  // self-contained
  }
  fs::remove_all(dir);
  fs::remove_all(all);
}

TEST(Render, ByteIdenticalWithoutTimestamp) {
  const auto a = scratch("a"), b = scratch("b");
  render_report(tiny_report(30), a, parse_formats("json,csv,svg"));
  render_report(tiny_report(30), b, parse_formats("json,csv,svg"));
  for (const char* name : {"report.json", "deltas.csv", "histogram.svg", "qq.svg", "scatter.svg"})
    EXPECT_EQ(oracle::read_file((a / name).string()), oracle::read_file((b / name).string())) << name;
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Render, IoErrorsNamePath) {
  const auto file = scratch("blocker");
  { std::ofstream(file.string()) << "x"; }
  try {
    render_report(tiny_report(3), file / "sub", parse_formats("json"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(file.string()), std::string::npos) << e.what();
  }
  fs::remove_all(file);
}

TEST(ParseFormats, Subsets) {
  const auto f = parse_formats("svg");
  EXPECT_TRUE(f.svg);
  EXPECT_FALSE(f.json);
  EXPECT_FALSE(f.csv);
  const auto e = parse_formats("");
  EXPECT_FALSE(e.json || e.csv || e.svg);
  EXPECT_THROW(parse_formats("json,png"), Error);
}
