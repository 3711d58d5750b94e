#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "ddt/cli.hpp"
#include "oracles.hpp"

using namespace ddt;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ddt");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ddt_cli_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const auto path = dir / "exp.conf";
  std::ofstream(path) << text;
  return path.string();
}

const char* kSmall = R"([experiment]
num_tests = 40
seed = 5

[input]
rows_a = 8
inner = 512
cols_b = 8

[impl_1]
label = "narrow"
accumulate_format = binary16

[impl_2]
label = "wide"
accumulate_format = binary32
)";

}  // namespace

TEST(Cli, ValidateGoodAndBad) {
  const auto dir = scratch("validate");
  auto r = cli({"validate", "--config", write_config(dir, kSmall)});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "OK\n");
  r = cli({"validate", "--config", write_config(dir, "[input]\nedge_case_rate = 1.5\n")});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("input.edge_case_rate"), std::string::npos) << r.err;
  r = cli({"validate", "--config", (dir / "missing.conf").string()});
  EXPECT_EQ(r.code, kExitError);
  fs::remove_all(dir);
}

TEST(Cli, PresetFilesValidateThroughPublicPath) {
  for (const char* name : {"case1", "case2", "case2_fixed"}) {
    const auto path = std::string(DDT_TEST_DATA_DIR) + "/../../configs/" + name + ".conf";
    EXPECT_EQ(cli({"validate", "--config", path}).code, kExitOk) << name;
  }
}

TEST(Cli, RunWritesArtifactsAndSummary) {
  const auto dir = scratch("run");
  const auto r = cli({"run", "--config", write_config(dir, kSmall), "--out", (dir / "out").string(), "--jobs", "2"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("narrow: Mean Error = "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find(", Std = "), std::string::npos);
  EXPECT_NE(r.out.find("verdict: accuracy = Impl2MoreAccurate"), std::string::npos) << r.out;
  for (const char* f : {"report.json", "deltas.csv", "histogram.svg", "qq.svg", "scatter.svg"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  fs::remove_all(dir);
}

TEST(Cli, FailOnRegressionExitsTwo) {
  const auto dir = scratch("regress");
  const auto cfg = write_config(dir, kSmall);
  const auto out = (dir / "out").string();
  EXPECT_EQ(cli({"run", "--config", cfg, "--out", out, "--fail-on-regression", "--formats", "json"}).code,
            kExitRegression);
  EXPECT_EQ(cli({"run", "--config", cfg, "--out", out, "--formats", "json"}).code, kExitOk);
  // Swapping the roles removes the regression.
  EXPECT_EQ(cli({"run", "--config", cfg, "--out", out, "--fail-on-regression", "--set",
                 "impl_1.accumulate_format=binary32", "--set", "impl_2.accumulate_format=binary16"})
                .code,
            kExitOk);
  fs::remove_all(dir);
}

TEST(Cli, SeedFlagAndFormats) {
  const auto dir = scratch("seed");
  const auto cfg = write_config(dir, kSmall);
  cli({"run", "--config", cfg, "--out", (dir / "a").string(), "--seed", "1", "--no-timestamp", "--formats", "csv"});
  cli({"run", "--config", cfg, "--out", (dir / "b").string(), "--seed", "2", "--no-timestamp", "--formats", "csv"});
  EXPECT_FALSE(fs::exists(dir / "a" / "report.json"));
  EXPECT_NE(oracle::read_file((dir / "a" / "deltas.csv").string()),
            oracle::read_file((dir / "b" / "deltas.csv").string()));
  EXPECT_EQ(cli({"run", "--config", cfg, "--formats", "pdf"}).code, kExitError);
  fs::remove_all(dir);
}

TEST(Cli, OutDirFromEnvironment) {
  const auto dir = scratch("env");
  ::setenv("DDT_OUT_DIR", (dir / "envout").string().c_str(), 1);
  const auto r = cli({"run", "--config", write_config(dir, kSmall), "--formats", "json"});
  ::unsetenv("DDT_OUT_DIR");
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_TRUE(fs::exists(dir / "envout" / "report.json"));
  fs::remove_all(dir);
}

TEST(Cli, InvalidRunExitsOne) {
  const auto dir = scratch("invalid");
  const auto r = cli({"run", "--config", write_config(dir, kSmall), "--out", (dir / "o").string(), "--set",
                      "input.edge_case_rate=0.5", "--set", "input.edge_cases=\"max_quarter\""});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("run invalid"), std::string::npos) << r.err;
  fs::remove_all(dir);
}

TEST(Cli, UnknownPresetListsValidNames) {
  const auto r = cli({"preset", "case9"});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("case1"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("case2_fixed"), std::string::npos);
}

TEST(Cli, ListKernelsSelftestAndUsage) {
  const auto l = cli({"list-kernels"});
  EXPECT_EQ(l.code, kExitOk);
  EXPECT_NE(l.out.find("pairwise"), std::string::npos);
  const auto s = cli({"selftest"});
  EXPECT_EQ(s.code, kExitOk) << s.out;
  EXPECT_EQ(cli({}).code, kExitError);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitError);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = DDT_CLI_PATH;
  EXPECT_EQ(std::system((bin + " selftest > /dev/null").c_str()), 0);
  const int bad = std::system((bin + " preset nope 2> /dev/null").c_str());
  EXPECT_TRUE(WIFEXITED(bad));
  EXPECT_EQ(WEXITSTATUS(bad), kExitError);
}
