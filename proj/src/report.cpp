#include "ddt/report.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>

#include "ddt/config.hpp"
#include "ddt/error.hpp"

namespace ddt {
namespace {

using nlohmann::ordered_json;

std::string shortest(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

// JSON has no infinities; they are written as strings.
ordered_json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

ordered_json ratio_json(const Ratio& r) {
  if (r.value) return number(*r.value);
  return r.undefined ? "undefined" : "inf";
}

ordered_json summary_json(const DescriptiveSummary& s) {
  ordered_json j;
  j["n"] = s.n;
  j["mean"] = s.mean;
  j["median"] = s.median;
  j["std"] = s.std;
  j["std_defined"] = s.std_defined;
  j["min"] = s.min;
  j["max"] = s.max;
  j["p50"] = s.p50;
  j["p90"] = s.p90;
  j["p95"] = s.p95;
  j["p99"] = s.p99;
  return j;
}

ordered_json test_json(const TestResult& t) {
  ordered_json j;
  j["method"] = t.method;
  j["statistic"] = number(t.statistic);
  j["p_value"] = number(t.p_value);
  j["n_effective"] = t.n_effective;
  j["n1"] = t.n1;
  j["n2"] = t.n2;
  j["mode"] = to_string(t.mode);
  j["alternative"] = to_string(t.alternative);
  return j;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename F>
BatteryEntry run_test(std::string name, F&& f) {
  BatteryEntry e;
  e.name = std::move(name);
  try {
    e.result = f();
  } catch (const Error& err) {
    e.error = err.what();
  }
  return e;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

// --- SVG -------------------------------------------------------------------

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 50;
constexpr const char* kColor1 = "#1f77b4";
constexpr const char* kColor2 = "#ff7f0e";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

struct Axes {
  double x0, x1, y0, y1;

  double px(double x) const {
    const double span = x1 > x0 ? x1 - x0 : 1.0;
    return kLeft + (x - x0) / span * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    const double span = y1 > y0 ? y1 - y0 : 1.0;
    return kHeight - kBottom - (y - y0) / span * (kHeight - kTop - kBottom);
  }
};

std::string svg_open(const std::string& title, const Axes& ax, const std::string& xlabel,
                     const std::string& ylabel) {
  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(kWidth) + "\" height=\"" +
       fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"15\">" + escape(title) + "</text>\n";
  const double bx = kHeight - kBottom;
  s += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(bx) + "\" x2=\"" + fmt(kWidth - kRight) + "\" y2=\"" +
       fmt(bx) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) + "\" y2=\"" + fmt(bx) +
       "\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& text, const char* anchor) {
    s += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" text-anchor=\"" + anchor +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(text) + "</text>\n";
  };
  label(kLeft, bx + 16, sci(ax.x0), "start");
  label(kWidth - kRight, bx + 16, sci(ax.x1), "end");
  label(kLeft - 6, bx, sci(ax.y0), "end");
  label(kLeft - 6, kTop + 10, sci(ax.y1), "end");
  label((kLeft + kWidth - kRight) / 2, kHeight - 12, xlabel, "middle");
  s += "<text x=\"16\" y=\"" + fmt((kTop + bx) / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"11\" transform=\"rotate(-90 16 " + fmt((kTop + bx) / 2) + ")\">" + escape(ylabel) +
       "</text>\n";
  return s;
}

std::string legend(const std::string& l1, const std::string& l2) {
  std::string s;
  const double x = kWidth - kRight - 200;
  s += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(kTop) + "\" width=\"12\" height=\"12\" fill=\"" + kColor1 +
       "\" fill-opacity=\"0.5\"/>\n";
  s += "<text x=\"" + fmt(x + 18) + "\" y=\"" + fmt(kTop + 10) + "\" font-family=\"sans-serif\" "
       "font-size=\"11\">" + escape(l1) + "</text>\n";
  s += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(kTop + 18) + "\" width=\"12\" height=\"12\" fill=\"" + kColor2 +
       "\" fill-opacity=\"0.5\"/>\n";
  s += "<text x=\"" + fmt(x + 18) + "\" y=\"" + fmt(kTop + 28) + "\" font-family=\"sans-serif\" "
       "font-size=\"11\">" + escape(l2) + "</text>\n";
  return s;
}

std::string point_plot(const std::string& title, const std::vector<QuantilePoint>& pts,
                       const std::string& xlabel, const std::string& ylabel) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : pts) {
    lo = std::min({lo, p.q1, p.q2});
    hi = std::max({hi, p.q1, p.q2});
  }
  if (pts.empty()) lo = hi = 0.0;
  if (hi <= lo) hi = lo + 1.0;
  const Axes ax{lo, hi, lo, hi};
  std::string s = svg_open(title, ax, xlabel, ylabel);
  s += "<line x1=\"" + fmt(ax.px(lo)) + "\" y1=\"" + fmt(ax.py(lo)) + "\" x2=\"" + fmt(ax.px(hi)) + "\" y2=\"" +
       fmt(ax.py(hi)) + "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  for (const auto& p : pts)
    s += "<circle cx=\"" + fmt(ax.px(p.q1)) + "\" cy=\"" + fmt(ax.py(p.q2)) + "\" r=\"2.5\" fill=\"" + kColor1 +
         "\" fill-opacity=\"0.6\"/>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace

HistogramPair histogram_shared_bins(std::span<const double> d1, std::span<const double> d2, std::size_t nbins) {
  if (d1.empty() || d2.empty()) throw Error("histogram_shared_bins: empty sample");
  if (nbins < 1) throw Error("histogram_shared_bins: nbins must be >= 1");
  double lo = std::min(*std::min_element(d1.begin(), d1.end()), *std::min_element(d2.begin(), d2.end()));
  double hi = std::max(*std::max_element(d1.begin(), d1.end()), *std::max_element(d2.begin(), d2.end()));

  HistogramPair h;
  auto degenerate = [&] {
    h.bin_edges = {lo, lo + std::max(std::fabs(lo), 1.0) * std::numeric_limits<double>::epsilon()};
  };
  if (hi == lo) {
    degenerate();
  } else {
    h.bin_edges.resize(nbins + 1);
    const double width = (hi - lo) / static_cast<double>(nbins);
    for (std::size_t i = 0; i < nbins; ++i) h.bin_edges[i] = lo + static_cast<double>(i) * width;
    h.bin_edges[nbins] = hi;
    for (std::size_t i = 1; i <= nbins; ++i)
      if (!(h.bin_edges[i] > h.bin_edges[i - 1])) {
        degenerate();
        h.bin_edges.back() = std::max(hi, h.bin_edges.back());
        break;
      }
  }
  const std::size_t bins = h.bin_edges.size() - 1;
  auto count = [&](std::span<const double> d) {
    std::vector<std::size_t> c(bins, 0);
    const double first = h.bin_edges.front();
    const double width = (h.bin_edges.back() - first) / static_cast<double>(bins);
    for (double x : d) {
      auto idx = static_cast<std::size_t>(std::clamp(std::floor((x - first) / width), 0.0,
                                                     static_cast<double>(bins - 1)));
      while (idx > 0 && x < h.bin_edges[idx]) --idx;
      while (idx + 1 < bins && x >= h.bin_edges[idx + 1]) ++idx;
      ++c[idx];
    }
    return c;
  };
  h.counts_1 = count(d1);
  h.counts_2 = count(d2);
  return h;
}

std::vector<QuantilePoint> qq_points(std::span<const double> d1, std::span<const double> d2) {
  if (d1.empty() || d2.empty()) throw Error("qq_points: empty sample");
  std::vector<double> s1(d1.begin(), d1.end());
  std::vector<double> s2(d2.begin(), d2.end());
  std::sort(s1.begin(), s1.end());
  std::sort(s2.begin(), s2.end());
  const std::size_t m = std::min(s1.size(), s2.size());
  std::vector<QuantilePoint> out;
  out.reserve(m);
  for (std::size_t k = 1; k <= m; ++k) {
    const double level = 100.0 * static_cast<double>(k) / static_cast<double>(m + 1);
    out.push_back({percentile_sorted(s1, level), percentile_sorted(s2, level)});
  }
  return out;
}

Report build_report(const ExperimentConfig& cfg, const DualDeltaRun& run, const ReportOptions& options) {
  const auto& d1 = run.delta_1;
  const auto& d2 = run.delta_2;
  Report r;
  r.config = config_to_json(cfg);
  r.config_hash = config_hash(cfg);
  r.label_1 = cfg.impl_1.label;
  r.label_2 = cfg.impl_2.label;
  r.metric = cfg.metric.name();
  r.trials = run.trials;
  r.delta_1.assign(d1.values().begin(), d1.values().end());
  r.delta_2.assign(d2.values().begin(), d2.values().end());
  r.summary_1 = describe(d1);
  r.summary_2 = describe(d2);
  r.comparison = compare_summaries(r.summary_1, r.summary_2);

  std::vector<double> diffs(d1.size());
  for (std::size_t i = 0; i < d1.size(); ++i) diffs[i] = d1[i] - d2[i];
  r.tests.push_back(run_test("ks_two_sample", [&] { return ks_two_sample(d1, d2); }));
  r.tests.push_back(run_test("wilcoxon_greater", [&] { return wilcoxon_signed_rank(d1, d2, Alternative::Greater); }));
  r.tests.push_back(run_test("wilcoxon_less", [&] { return wilcoxon_signed_rank(d1, d2, Alternative::Less); }));
  r.tests.push_back(run_test("sign_greater", [&] { return sign_test(d1, d2, Alternative::Greater); }));
  r.tests.push_back(run_test("sign_less", [&] { return sign_test(d1, d2, Alternative::Less); }));
  r.tests.push_back(run_test("paired_t_greater", [&] { return paired_t_test(d1, d2, Alternative::Greater); }));
  r.tests.push_back(run_test("shapiro_wilk_differences", [&] { return shapiro_wilk(diffs); }));
  r.tests.push_back(run_test("brown_forsythe", [&] { return variance_test(d1, d2).test; }));

  r.verdict = decide_verdict(d1, d2, cfg.alpha);
  r.histogram = histogram_shared_bins(d1.values(), d2.values(), options.histogram_bins);
  r.qq = qq_points(d1.values(), d2.values());
  r.run = run.metadata;
  if (options.timestamp) r.timestamp = utc_now();
  return r;
}

nlohmann::ordered_json report_to_json(const Report& r) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  if (r.timestamp) j["generated_at"] = *r.timestamp;
  j["config"] = r.config;
  j["config_hash"] = r.config_hash;

  ordered_json run;
  run["seed"] = r.run.seed;
  run["requested_trials"] = r.run.requested_trials;
  run["used_trials"] = r.delta_1.size();
  ordered_json excluded = ordered_json::array();
  for (const auto& e : r.run.excluded) excluded.push_back({{"trial", e.trial}, {"reason", e.reason}});
  run["excluded"] = excluded;
  run["valid"] = r.run.valid;
  if (r.timestamp) run["wall_time_s"] = r.run.wall_time_s;
  j["run"] = run;

  j["metric"] = r.metric;
  j["implementations"] = {
      {"impl_1", {{"label", r.label_1}, {"summary", summary_json(r.summary_1)}}},
      {"impl_2", {{"label", r.label_2}, {"summary", summary_json(r.summary_2)}}},
  };
  j["comparison"] = {{"mean_ratio", ratio_json(r.comparison.mean)},
                     {"p99_ratio", ratio_json(r.comparison.p99)},
                     {"max_ratio", ratio_json(r.comparison.max)},
                     {"spread_ratio", ratio_json(r.comparison.spread)}};

  ordered_json tests = ordered_json::array();
  for (const auto& t : r.tests) {
    ordered_json e;
    e["name"] = t.name;
    if (t.result)
      e["result"] = test_json(*t.result);
    else
      e["error"] = t.error;
    tests.push_back(e);
  }
  j["tests"] = tests;

  ordered_json evidence = ordered_json::array();
  for (const auto& e : r.verdict.evidence) evidence.push_back({{"role", e.role}, {"result", test_json(e.result)}});
  j["verdict"] = {{"accuracy", to_string(r.verdict.accuracy)},
                  {"stability", to_string(r.verdict.stability)},
                  {"alpha", r.verdict.alpha},
                  {"evidence", evidence},
                  {"caveats", r.verdict.caveats}};

  j["histogram"] = {{"bin_edges", r.histogram.bin_edges},
                    {"counts_1", r.histogram.counts_1},
                    {"counts_2", r.histogram.counts_2}};
  ordered_json qq = ordered_json::array();
  for (const auto& p : r.qq) qq.push_back({p.q1, p.q2});
  j["qq_points"] = qq;
  ordered_json scatter = ordered_json::array();
  for (std::size_t i = 0; i < r.delta_1.size(); ++i) scatter.push_back({r.delta_1[i], r.delta_2[i]});
  j["scatter_points"] = scatter;
  return j;
}

std::string deltas_csv(const Report& r) {
  std::string out = "trial,delta_1,delta_2\n";
  for (std::size_t i = 0; i < r.delta_1.size(); ++i) {
    out += std::to_string(i < r.trials.size() ? r.trials[i] : i);
    out += ',';
    out += shortest(r.delta_1[i]);
    out += ',';
    out += shortest(r.delta_2[i]);
    out += '\n';
  }
  return out;
}

std::string histogram_svg(const Report& r) {
  const auto& h = r.histogram;
  std::size_t peak = 1;
  for (std::size_t i = 0; i < h.counts_1.size(); ++i) peak = std::max({peak, h.counts_1[i], h.counts_2[i]});
  const Axes ax{h.bin_edges.front(), h.bin_edges.back(), 0.0, static_cast<double>(peak)};
  std::string s = svg_open("Error distribution comparison", ax, "Error (" + r.metric + ")", "Frequency");
  auto bars = [&](const std::vector<std::size_t>& counts, const char* color) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] == 0) continue;
      const double x0 = ax.px(h.bin_edges[i]);
      const double x1 = ax.px(h.bin_edges[i + 1]);
      const double y = ax.py(static_cast<double>(counts[i]));
      s += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(std::max(x1 - x0, 0.5)) +
           "\" height=\"" + fmt(ax.py(0) - y) + "\" fill=\"" + color + "\" fill-opacity=\"0.5\"/>\n";
    }
  };
  bars(h.counts_1, kColor1);
  bars(h.counts_2, kColor2);
  s += legend(r.label_1, r.label_2);
  s += "</svg>\n";
  return s;
}

std::string qq_svg(const Report& r) {
  return point_plot("Q-Q plot of error distributions", r.qq, "Quantiles of " + r.label_1,
                    "Quantiles of " + r.label_2);
}

std::string scatter_svg(const Report& r) {
  std::vector<QuantilePoint> pts;
  pts.reserve(r.delta_1.size());
  for (std::size_t i = 0; i < r.delta_1.size(); ++i) pts.push_back({r.delta_1[i], r.delta_2[i]});
  return point_plot("Paired errors per trial", pts, "Error of " + r.label_1, "Error of " + r.label_2);
}

OutputFormats parse_formats(std::string_view text) {
  OutputFormats f;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const auto item = text.substr(start, end - start);
    if (item == "json")
      f.json = true;
    else if (item == "csv")
      f.csv = true;
    else if (item == "svg")
      f.svg = true;
    else if (!item.empty())
      throw Error("unknown output format '" + std::string(item) + "' (expected json, csv, svg)");
    start = end + 1;
  }
  return f;
}

std::vector<std::filesystem::path> render_report(const Report& r, const std::filesystem::path& dir,
                                                 const OutputFormats& formats) {
  std::vector<std::filesystem::path> written;
  if (!formats.json && !formats.csv && !formats.svg) return written;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  auto emit = [&](const char* name, const std::string& content) {
    const auto path = dir / name;
    write_atomic(path, content);
    written.push_back(path);
  };
  if (formats.json) emit("report.json", report_to_json(r).dump(2) + "\n");
  if (formats.csv) emit("deltas.csv", deltas_csv(r));
  if (formats.svg) {
    emit("histogram.svg", histogram_svg(r));
    emit("qq.svg", qq_svg(r));
    emit("scatter.svg", scatter_svg(r));
  }
  return written;
}

}  // namespace ddt
