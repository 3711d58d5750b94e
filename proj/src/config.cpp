#include "ddt/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "ddt/error.hpp"

namespace ddt {
namespace {

#include "presets.inc"

struct Value {
  enum class Kind { String, Number, Bare };
  Kind kind = Kind::Bare;
  std::string text;
  int line = 0;
  int column = 0;
};

// section -> key -> value
using Table = std::map<std::string, std::map<std::string, Value>>;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"experiment", {"num_tests", "seed", "alpha", "metric"}},
      {"input",
       {"rows_a", "inner", "cols_b", "distribution", "uniform_lo", "uniform_hi", "lognormal_mu",
        "lognormal_sigma", "element_format", "edge_case_rate", "edge_cases"}},
      {"impl_1",
       {"label", "kind", "element_format", "accumulate_format", "reduction", "block_size",
        "output_format", "command", "timeout_s"}},
      {"impl_2",
       {"label", "kind", "element_format", "accumulate_format", "reduction", "block_size",
        "output_format", "command", "timeout_s"}},
  };
  return s;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_bare(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '+' || c == '-' ||
         c == ',' || c == '(' || c == ')' || c == '=';
}

class Parser {
 public:
  Parser(std::string_view text, int line) : text_(text), line_(line) {}

  // Parses one value starting at pos_, leaves pos_ after it.
  Value value() {
    skip_ws();
    Value v;
    v.line = line_;
    v.column = column();
    if (at_end()) fail("expected a value");
    if (peek() == '"') {
      ++pos_;
      v.kind = Value::Kind::String;
      for (;;) {
        if (at_end()) fail("unterminated string");
        char c = text_[pos_++];
        if (c == '"') break;
        if (c == '\\') {
          if (at_end()) fail("unterminated escape");
          c = text_[pos_++];
          if (c != '"' && c != '\\') fail("unknown escape '\\" + std::string(1, c) + "'");
        }
        v.text.push_back(c);
      }
      return v;
    }
    const std::size_t start = pos_;
    while (!at_end() && is_bare(peek())) ++pos_;
    if (pos_ == start) fail("unexpected character '" + std::string(1, peek()) + "'");
    v.text = std::string(text_.substr(start, pos_ - start));
    double d;
    const auto* b = v.text.data();
    const auto r = std::from_chars(b, b + v.text.size(), d);
    v.kind = (r.ec == std::errc{} && r.ptr == b + v.text.size()) ? Value::Kind::Number : Value::Kind::Bare;
    return v;
  }

  std::string ident() {
    if (at_end() || !is_ident_start(peek())) fail("expected an identifier");
    const std::size_t start = pos_;
    while (!at_end() && is_ident(peek())) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void expect_line_end() {
    skip_ws();
    if (!at_end() && peek() != '#') fail("unexpected trailing text");
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  int column() const { return static_cast<int>(pos_) + 1; }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(msg, line_, column()); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
};

Table parse_table(std::string_view text) {
  Table table;
  std::string section;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = end + 1;

    Parser p(line, line_no);
    p.skip_ws();
    if (p.at_end() || p.peek() == '#') continue;
    if (p.peek() == '[') {
      p.expect('[');
      p.skip_ws();
      const int col = p.column();
      section = p.ident();
      p.expect(']');
      p.expect_line_end();
      if (!schema().count(section))
        throw ConfigError("unknown section [" + section + "] (expected experiment, input, impl_1, impl_2)",
                          line_no, col);
      if (table.count(section)) throw ConfigError("duplicate section [" + section + "]", line_no, col);
      table[section];
      continue;
    }
    const int key_col = p.column();
    const std::string key = p.ident();
    if (section.empty()) throw ConfigError("key '" + key + "' appears before any [section]", line_no, key_col);
    if (!schema().at(section).count(key))
      throw ConfigError("unknown key '" + section + "." + key + "'", line_no, key_col);
    if (table[section].count(key))
      throw ConfigError("duplicate key '" + section + "." + key + "'", line_no, key_col);
    p.expect('=');
    Value v = p.value();
    p.expect_line_end();
    table[section][key] = std::move(v);
  }
  return table;
}

// Typed field access with errors naming the field.
class Fields {
 public:
  explicit Fields(const Table& t) : table_(t) {}

  const Value* find(const std::string& section, const std::string& key) const {
    auto s = table_.find(section);
    if (s == table_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  bool has(const std::string& section, const std::string& key) const { return find(section, key); }

  std::optional<std::string> text(const std::string& section, const std::string& key) const {
    const Value* v = find(section, key);
    if (!v) return std::nullopt;
    return v->text;
  }

  std::optional<double> number(const std::string& section, const std::string& key) const {
    const Value* v = find(section, key);
    if (!v) return std::nullopt;
    if (v->kind != Value::Kind::Number) fail(*v, section, key, "expected a number");
    return std::strtod(v->text.c_str(), nullptr);
  }

  std::optional<std::uint64_t> integer(const std::string& section, const std::string& key) const {
    const Value* v = find(section, key);
    if (!v) return std::nullopt;
    std::uint64_t out = 0;
    const auto* b = v->text.data();
    const auto r = std::from_chars(b, b + v->text.size(), out);
    if (v->kind != Value::Kind::Number || r.ec != std::errc{} || r.ptr != b + v->text.size())
      fail(*v, section, key, "expected a non-negative integer");
    return out;
  }

  template <typename F>
  auto convert(const std::string& section, const std::string& key, F&& f) const
      -> std::optional<decltype(f(std::string{}))> {
    const Value* v = find(section, key);
    if (!v) return std::nullopt;
    try {
      return f(v->text);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      fail(*v, section, key, e.what());
    }
  }

  [[noreturn]] static void fail(const Value& v, const std::string& section, const std::string& key,
                                const std::string& why) {
    throw ConfigError(section + "." + key + ": " + why, v.line, v.column);
  }

 private:
  const Table& table_;
};

template <typename T>
void assign(T& target, const std::optional<T>& v) {
  if (v) target = *v;
}

ImplementationHandle build_impl(const Fields& f, const std::string& section, const FloatFormat& input_fmt) {
  ImplementationHandle h;
  h.label = f.text(section, "label").value_or(section);
  const std::string kind = f.text(section, "kind").value_or("builtin");
  static const std::set<std::string> builtin_keys = {"element_format", "accumulate_format", "reduction",
                                                     "block_size", "output_format"};
  static const std::set<std::string> external_keys = {"command", "timeout_s"};
  if (kind == "builtin") {
    for (const auto& k : external_keys)
      if (const Value* v = f.find(section, k))
        Fields::fail(*v, section, k, "only valid for kind = external");
    KernelConfig k;
    k.element_format = input_fmt;
    assign(k.element_format, f.convert(section, "element_format", parse_format));
    assign(k.accumulate_format, f.convert(section, "accumulate_format", parse_format));
    assign(k.reduction, f.convert(section, "reduction", parse_reduction));
    assign(k.output_format, f.convert(section, "output_format", parse_format));
    if (auto bs = f.integer(section, "block_size")) {
      if (*bs < 1) Fields::fail(*f.find(section, "block_size"), section, "block_size", "must be >= 1");
      k.block_size = static_cast<std::size_t>(*bs);
    }
    h.kind = k;
  } else if (kind == "external") {
    for (const auto& k : builtin_keys)
      if (const Value* v = f.find(section, k))
        Fields::fail(*v, section, k, "only valid for kind = builtin");
    ExternalEndpoint ep;
    const auto cmd = f.text(section, "command");
    if (!cmd || cmd->empty())
      throw ConfigError(section + ".command: required for kind = external");
    ep.command = *cmd;
    if (auto t = f.number(section, "timeout_s")) {
      if (!(*t > 0.0)) Fields::fail(*f.find(section, "timeout_s"), section, "timeout_s", "must be positive");
      ep.timeout_s = *t;
    }
    h.kind = ep;
  } else {
    Fields::fail(*f.find(section, "kind"), section, "kind", "expected builtin or external, got '" + kind + "'");
  }
  return h;
}

std::vector<EdgeCase> parse_edge_list(const std::string& text) {
  std::vector<EdgeCase> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string item = text.substr(start, end - start);
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) out.push_back(parse_edge_case(item));
    start = end + 1;
  }
  return out;
}

}  // namespace

ConfigOverride parse_override(std::string_view text) {
  const auto eq = text.find('=');
  const auto dot = text.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq)
    throw ConfigError("override '" + std::string(text) + "' must look like section.key=value");
  return {std::string(text.substr(0, eq)), std::string(text.substr(eq + 1))};
}

ExperimentConfig parse_config(std::string_view text, const std::vector<ConfigOverride>& overrides) {
  Table table = parse_table(text);
  for (const auto& o : overrides) {
    const auto dot = o.key.find('.');
    const std::string section = o.key.substr(0, dot);
    const std::string key = dot == std::string::npos ? "" : o.key.substr(dot + 1);
    auto s = schema().find(section);
    if (s == schema().end() || !s->second.count(key))
      throw ConfigError("override: unknown key '" + o.key + "'");
    Parser p(o.value, 0);
    Value v;
    try {
      v = p.value();
      p.expect_line_end();
    } catch (const ConfigError& e) {
      throw ConfigError("override '" + o.key + "': " + e.what());
    }
    table[section][key] = std::move(v);
  }

  const Fields f(table);
  ExperimentConfig cfg;
  if (auto n = f.integer("experiment", "num_tests")) cfg.num_tests = static_cast<std::size_t>(*n);
  assign(cfg.seed, f.integer("experiment", "seed"));
  assign(cfg.alpha, f.number("experiment", "alpha"));
  assign(cfg.metric, f.convert("experiment", "metric", parse_metric));

  InputSpec& in = cfg.input;
  if (auto v = f.integer("input", "rows_a")) in.rows_a = static_cast<std::size_t>(*v);
  if (auto v = f.integer("input", "inner")) in.inner = static_cast<std::size_t>(*v);
  if (auto v = f.integer("input", "cols_b")) in.cols_b = static_cast<std::size_t>(*v);
  assign(in.distribution, f.convert("input", "distribution", parse_distribution));
  assign(in.uniform_lo, f.number("input", "uniform_lo"));
  assign(in.uniform_hi, f.number("input", "uniform_hi"));
  assign(in.lognormal_mu, f.number("input", "lognormal_mu"));
  assign(in.lognormal_sigma, f.number("input", "lognormal_sigma"));
  assign(in.element_format, f.convert("input", "element_format", parse_format));
  assign(in.edge_case_rate, f.number("input", "edge_case_rate"));
  assign(in.edge_cases, f.convert("input", "edge_cases", parse_edge_list));

  cfg.impl_1 = build_impl(f, "impl_1", in.element_format);
  cfg.impl_2 = build_impl(f, "impl_2", in.element_format);

  // Semantic checks, reported against the offending value where possible.
  auto check = [&](bool ok, const char* section, const char* key, const std::string& why) {
    if (ok) return;
    if (const Value* v = f.find(section, key)) Fields::fail(*v, section, key, why);
    throw ConfigError(std::string(section) + "." + key + ": " + why);
  };
  check(cfg.num_tests >= 1, "experiment", "num_tests", "must be >= 1");
  check(cfg.alpha > 0.0 && cfg.alpha < 1.0, "experiment", "alpha", "must be in (0, 1)");
  check(in.rows_a > 0, "input", "rows_a", "must be positive");
  check(in.inner > 0, "input", "inner", "must be positive");
  check(in.cols_b > 0, "input", "cols_b", "must be positive");
  check(in.edge_case_rate >= 0.0 && in.edge_case_rate <= 1.0, "input", "edge_case_rate",
        "must be in [0, 1]");
  check(in.edge_case_rate == 0.0 || !in.edge_cases.empty(), "input", "edge_cases",
        "must not be empty when edge_case_rate > 0");
  if (in.distribution == InputDistribution::Uniform)
    check(in.uniform_lo < in.uniform_hi, "input", "uniform_hi", "must exceed input.uniform_lo");
  if (in.distribution == InputDistribution::LogNormal)
    check(in.lognormal_sigma > 0.0, "input", "lognormal_sigma", "must be positive");
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  using nlohmann::ordered_json;
  auto impl_json = [](const ImplementationHandle& h) {
    ordered_json j;
    j["label"] = h.label;
    if (const auto* k = std::get_if<KernelConfig>(&h.kind)) {
      j["kind"] = "builtin";
      j["element_format"] = k->element_format.label();
      j["accumulate_format"] = k->accumulate_format.label();
      j["reduction"] = to_string(k->reduction);
      j["block_size"] = k->block_size;
      j["output_format"] = k->output_format.label();
    } else {
      const auto& ep = std::get<ExternalEndpoint>(h.kind);
      j["kind"] = "external";
      j["command"] = ep.command;
      j["timeout_s"] = ep.timeout_s;
    }
    return j;
  };
  ordered_json in;
  in["rows_a"] = cfg.input.rows_a;
  in["inner"] = cfg.input.inner;
  in["cols_b"] = cfg.input.cols_b;
  in["distribution"] = to_string(cfg.input.distribution);
  if (cfg.input.distribution == InputDistribution::Uniform) {
    in["uniform_lo"] = cfg.input.uniform_lo;
    in["uniform_hi"] = cfg.input.uniform_hi;
  } else if (cfg.input.distribution == InputDistribution::LogNormal) {
    in["lognormal_mu"] = cfg.input.lognormal_mu;
    in["lognormal_sigma"] = cfg.input.lognormal_sigma;
  }
  in["element_format"] = cfg.input.element_format.label();
  in["edge_case_rate"] = cfg.input.edge_case_rate;
  std::vector<std::string> edges;
  for (auto e : cfg.input.edge_cases) edges.push_back(to_string(e));
  in["edge_cases"] = edges;

  ordered_json j;
  j["experiment"] = {{"num_tests", cfg.num_tests},
                     {"seed", cfg.seed},
                     {"alpha", cfg.alpha},
                     {"metric", cfg.metric.name()}};
  j["input"] = in;
  j["impl_1"] = impl_json(cfg.impl_1);
  j["impl_2"] = impl_json(cfg.impl_2);
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config_to_json(cfg).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
  return out;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"case1", "case2", "case2_fixed"};
  return names;
}

std::string_view preset_text(std::string_view name) {
  if (name == "case1") return kPresetCase1;
  if (name == "case2") return kPresetCase2;
  if (name == "case2_fixed") return kPresetCase2Fixed;
  throw Error("unknown preset '" + std::string(name) + "' (valid presets: case1, case2, case2_fixed)");
}

}  // namespace ddt
