// martrep command-line harness: runs experiments against the shared library's
// C interface and writes machine-readable reports.
//
// Subcommands: gamma, bte, dyson, mc, oracle, convergence, golden. Each takes
// --config <file> (a JSON document) plus flag overrides; exact scalars are
// rational strings like "1/4". Reports go to <out>.csv and <out>.json (atomic
// tmp+rename writes); the console table additionally shows wall time, which
// is deliberately kept out of the files so reruns with the same config are
// byte-identical. Exit codes: 0 ok, 2 config error, 3 numeric or resource
// error, 4 golden tolerance failure.

#include <martrep/martrep.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitGolden = 4;

struct CliError {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw CliError{code, message}; }

int exit_code_for(mr_status rc) {
  switch (rc) {
    case MR_ERR_RESOURCE:
    case MR_ERR_NUMERIC:
    case MR_ERR_INTERNAL:
      return kExitRuntime;
    default:
      // domain, usage, unsupported, parse: the request itself is wrong
      return kExitConfig;
  }
}

/* ---- RAII over the C handles ---- */

struct CStr {
  char* p = nullptr;
  ~CStr() { mr_free_string(p); }
  std::string str() const { return p != nullptr ? p : ""; }
};

void check(mr_status rc, const CStr& err, const std::string& what) {
  if (rc != MR_OK) fail(exit_code_for(rc), what + ": " + (err.p != nullptr ? err.p : "failed"));
}

struct FunctionalDeleter {
  void operator()(mr_functional_t* f) const { mr_functional_destroy(f); }
};
using FunctionalPtr = std::unique_ptr<mr_functional_t, FunctionalDeleter>;

struct PathDeleter {
  void operator()(mr_path_t* p) const { mr_path_destroy(p); }
};
using PathPtr = std::unique_ptr<mr_path_t, PathDeleter>;

struct DysonDeleter {
  void operator()(mr_dyson_result_t* r) const { mr_dyson_result_destroy(r); }
};
using DysonPtr = std::unique_ptr<mr_dyson_result_t, DysonDeleter>;

/* ---- exact scalars ---- */

// Canonical "p" or "p/q" form; rejects unparseable text with a field-level message.
std::string normalize_rational(const std::string& text, const std::string& field) {
  CStr out, err;
  const mr_status rc = mr_rational_fma(text.c_str(), 0, "0", &out.p, &err.p);
  if (rc != MR_OK) fail(kExitConfig, "config field '" + field + "': " + err.str());
  return out.str();
}

// a + multiplier*b on canonical strings (start-time derivation stays exact).
std::string rational_fma(const std::string& a, int64_t multiplier, const std::string& b) {
  CStr out, err;
  check(mr_rational_fma(a.c_str(), multiplier, b.c_str(), &out.p, &err.p), err,
        "rational arithmetic");
  return out.str();
}

double rational_value(const std::string& canonical) {
  const size_t slash = canonical.find('/');
  if (slash == std::string::npos) return std::strtod(canonical.c_str(), nullptr);
  const double num = std::strtod(canonical.substr(0, slash).c_str(), nullptr);
  const double den = std::strtod(canonical.substr(slash + 1).c_str(), nullptr);
  return num / den;
}

/* ---- formatting ---- */

std::string fmt_g(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string fmt_ms(double ms) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.1f", ms);
  return buffer;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string quoted = "\"";
  for (char c : cell) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

double relative_error(double value, double reference) {
  return std::fabs(value - reference) / std::max(1.0, std::fabs(reference));
}

/* ---- config handling ---- */

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(kExitConfig, "cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  json cfg;
  try {
    cfg = json::parse(buffer.str());
  } catch (const std::exception& e) {
    fail(kExitConfig, "config file " + path + " is not valid JSON: " + e.what());
  }
  if (!cfg.is_object()) fail(kExitConfig, "config file " + path + " must hold a JSON object");
  return cfg;
}

std::string get_string(const json& cfg, const std::string& key, const std::string& fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (!v.is_string()) fail(kExitConfig, "config field '" + key + "': expected a string");
  return v.get<std::string>();
}

// Rational config scalar: a string like "1/4", or an integer.
std::string get_rational(const json& cfg, const std::string& key, const std::string& fallback) {
  if (!cfg.contains(key)) return normalize_rational(fallback, key);
  const json& v = cfg.at(key);
  if (v.is_string()) return normalize_rational(v.get<std::string>(), key);
  if (v.is_number_integer()) return normalize_rational(std::to_string(v.get<int64_t>()), key);
  fail(kExitConfig, "config field '" + key + "': give exact values as rational strings (\"p/q\")");
}

uint64_t get_uint(const json& cfg, const std::string& key, uint64_t fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (v.is_number_unsigned()) return v.get<uint64_t>();
  if (v.is_number_integer() && v.get<int64_t>() >= 0)
    return static_cast<uint64_t>(v.get<int64_t>());
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(s.c_str(), &end, 10);
    if (end != nullptr && *end == '\0' && !s.empty()) return parsed;
  }
  fail(kExitConfig, "config field '" + key + "': expected a nonnegative integer");
}

double get_number(const json& cfg, const std::string& key, double fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    char* end = nullptr;
    const double parsed = std::strtod(s.c_str(), &end);
    if (end != nullptr && *end == '\0' && !s.empty()) return parsed;
  }
  fail(kExitConfig, "config field '" + key + "': expected a number");
}

bool get_bool(const json& cfg, const std::string& key, bool fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "true") return true;
    if (s == "false") return false;
  }
  fail(kExitConfig, "config field '" + key + "': expected true or false");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == ',') {
      if (!current.empty()) parts.push_back(current);
      current.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      current += c;
    }
  }
  if (!current.empty()) parts.push_back(current);
  return parts;
}

/* ---- functionals ---- */

struct FunctionalSpec {
  FunctionalPtr f;
  std::string name;  // example1 | example2 | monomial | expW | custom
  unsigned monomial_n = 0;
  std::string T_str;
  double T_val = 0.0;
  std::string tau_str;
  double tau_val = 0.0;
};

FunctionalPtr make_functional(mr_status (*builder)(const char*, mr_functional_t**, char**),
                              const std::string& horizon, const std::string& what) {
  mr_functional_t* f = nullptr;
  CStr err;
  check(builder(horizon.c_str(), &f, &err.p), err, what);
  return FunctionalPtr(f);
}

// Builds the functional named in the config ("functional": example1 | example2 |
// monomial(n) | expW, or serialized text / "functional_file") plus its time
// parameters T and, for example1, tau.
FunctionalSpec resolve_functional(const json& cfg) {
  FunctionalSpec spec;
  std::string name = get_string(cfg, "functional", "");
  if (cfg.contains("functional_file")) {
    const std::string file = get_string(cfg, "functional_file", "");
    std::ifstream in(file);
    if (!in) fail(kExitConfig, "cannot open functional_file: " + file);
    std::stringstream buffer;
    buffer << in.rdbuf();
    name = buffer.str();
  }
  if (name.empty())
    fail(kExitConfig,
         "config field 'functional' is required "
         "(example1, example2, monomial(n), expW, or serialized text)");

  spec.T_str = get_rational(cfg, "T", "1");
  spec.T_val = rational_value(spec.T_str);

  if (name == "example1") {
    if (!cfg.contains("tau")) fail(kExitConfig, "config field 'tau' is required for example1");
    spec.tau_str = get_rational(cfg, "tau", "2");
    spec.tau_val = rational_value(spec.tau_str);
    mr_functional_t* f = nullptr;
    CStr err;
    check(mr_functional_heat_kernel(spec.tau_str.c_str(), spec.T_str.c_str(), &f, &err.p), err,
          "building example1");
    spec.f.reset(f);
    spec.name = "example1";
  } else if (name == "example2") {
    spec.f = make_functional(mr_functional_exp_integral, spec.T_str, "building example2");
    spec.name = "example2";
  } else if (name == "expW") {
    spec.f = make_functional(mr_functional_exp_wiener, spec.T_str, "building expW");
    spec.name = "expW";
  } else if (name.rfind("monomial(", 0) == 0 && name.back() == ')') {
    const std::string digits = name.substr(9, name.size() - 10);
    char* end = nullptr;
    const unsigned long n = std::strtoul(digits.c_str(), &end, 10);
    if (digits.empty() || end == nullptr || *end != '\0' || n > 1000)
      fail(kExitConfig, "config field 'functional': bad monomial order in '" + name + "'");
    mr_functional_t* f = nullptr;
    CStr err;
    check(mr_functional_wiener_power(static_cast<unsigned>(n), spec.T_str.c_str(), &f, &err.p),
          err, "building monomial");
    spec.f.reset(f);
    spec.name = "monomial";
    spec.monomial_n = static_cast<unsigned>(n);
  } else if (!name.empty() && name.front() == '{') {
    mr_functional_t* f = nullptr;
    CStr err;
    check(mr_functional_parse(name.c_str(), &f, &err.p), err, "parsing functional text");
    spec.f.reset(f);
    spec.name = "custom";
    CStr horizon;
    check(mr_functional_horizon(spec.f.get(), &horizon.p, &err.p), err, "functional horizon");
    if (cfg.contains("T") && horizon.str() != spec.T_str)
      fail(kExitConfig, "config field 'T' (" + spec.T_str +
                            ") does not match the functional's horizon (" + horizon.str() + ")");
    spec.T_str = horizon.str();
    spec.T_val = rational_value(spec.T_str);
  } else {
    fail(kExitConfig, "config field 'functional': unknown name '" + name + "'");
  }
  return spec;
}

std::string functional_label(const FunctionalSpec& spec) {
  if (spec.name == "monomial") return "monomial(" + std::to_string(spec.monomial_n) + ")";
  return spec.name;
}

/* ---- paths ---- */

struct BuiltPath {
  PathPtr p;
  std::vector<double> times;
  std::vector<double> values;
  json echo;  // resolved spec for the report
};

// Stream for built-in random prefixes, decoupled from the Monte Carlo keying
// so a shared seed never correlates a path with the estimator's draws.
double path_normal(uint64_t seed, uint64_t index) {
  return mr_normal_draw(seed ^ UINT64_C(0x9E3779B97F4A7C15), index, 0);
}

json path_spec(const json& cfg) {
  if (!cfg.contains("path")) return json{{"kind", "zero"}, {"steps", 16}};
  const json& v = cfg.at("path");
  if (v.is_object()) return v;
  if (!v.is_string())
    fail(kExitConfig, "config field 'path': expected an object or a shorthand string");
  const std::vector<std::string> parts = split_list(
      [&] {  // reuse the comma splitter on the ':' shorthand
        std::string s = v.get<std::string>();
        for (char& c : s)
          if (c == ':') c = ',';
        return s;
      }());
  if (parts.empty()) fail(kExitConfig, "config field 'path': empty spec");
  json spec{{"kind", parts[0]}};
  const std::string& kind = parts[0];
  if (kind == "zero") {
    if (parts.size() > 1) spec["steps"] = std::strtoull(parts[1].c_str(), nullptr, 10);
  } else if (kind == "linear") {
    if (parts.size() > 1) spec["slope"] = parts[1];
    if (parts.size() > 2) spec["steps"] = std::strtoull(parts[2].c_str(), nullptr, 10);
  } else if (kind == "random") {
    if (parts.size() > 1) spec["seed"] = std::strtoull(parts[1].c_str(), nullptr, 10);
    if (parts.size() > 2) spec["steps"] = std::strtoull(parts[2].c_str(), nullptr, 10);
  } else {
    fail(kExitConfig, "config field 'path': unknown kind '" + kind + "'");
  }
  return spec;
}

BuiltPath make_path(const std::vector<double>& times, const std::vector<double>& values,
                    double horizon, json echo) {
  BuiltPath built;
  built.times = times;
  built.values = values;
  built.echo = std::move(echo);
  mr_path_t* p = nullptr;
  CStr err;
  check(mr_path_create(times.data(), values.data(), times.size(), horizon, &p, &err.p), err,
        "building path");
  built.p.reset(p);
  return built;
}

// Builds the observed prefix over [0, t]. Built-in kinds generate a uniform
// grid; "inline" takes the sample arrays verbatim (and then defines t).
BuiltPath build_path(const json& spec, double t, double horizon) {
  const std::string kind = get_string(spec, "kind", "zero");
  if (kind == "inline") {
    if (!spec.contains("times") || !spec.contains("values") || !spec["times"].is_array() ||
        !spec["values"].is_array())
      fail(kExitConfig, "config field 'path': inline paths need 'times' and 'values' arrays");
    std::vector<double> times, values;
    for (const json& v : spec["times"]) times.push_back(v.get<double>());
    for (const json& v : spec["values"]) values.push_back(v.get<double>());
    return make_path(times, values, horizon, spec);
  }

  const uint64_t steps_cfg = get_uint(spec, "steps", 16);
  const size_t steps = t > 0.0 ? static_cast<size_t>(steps_cfg) : 0;
  if (t > 0.0 && steps == 0) fail(kExitConfig, "config field 'path': steps must be >= 1");
  std::vector<double> times(steps + 1), values(steps + 1, 0.0);
  for (size_t i = 0; i <= steps; ++i) times[i] = steps == 0 ? 0.0 : t * double(i) / double(steps);
  json echo{{"kind", kind}, {"steps", steps}};

  if (kind == "zero") {
    // values stay 0
  } else if (kind == "linear") {
    const std::string slope_str = get_rational(spec, "slope", "1");
    const double slope = rational_value(slope_str);
    for (size_t i = 0; i <= steps; ++i) values[i] = slope * times[i];
    echo["slope"] = slope_str;
  } else if (kind == "random") {
    const uint64_t seed = get_uint(spec, "seed", 1);
    for (size_t i = 1; i <= steps; ++i) {
      const double dt = times[i] - times[i - 1];
      values[i] = values[i - 1] + std::sqrt(dt) * path_normal(seed, i - 1);
    }
    echo["seed"] = seed;
  } else {
    fail(kExitConfig, "config field 'path': unknown kind '" + kind + "'");
  }
  return make_path(times, values, horizon, echo);
}

double trapezoid_integral(const BuiltPath& path) {
  double acc = 0.0;
  for (size_t i = 1; i < path.times.size(); ++i)
    acc += (path.times[i] - path.times[i - 1]) * (path.values[i] + path.values[i - 1]) / 2.0;
  return acc;
}

/* ---- reference values ---- */

struct Reference {
  bool has = false;
  double value = 0.0;
  std::string source;  // "moment-oracle" or "closed-form"
};

// Ground truth when one exists: the Gaussian-moment oracle for W(T)-measurable
// polynomial and exponential functionals, closed forms for the two built-in
// examples, nothing for custom functionals.
Reference compute_reference(const FunctionalSpec& spec, const std::string& t_str,
                            const BuiltPath& path) {
  Reference ref;
  const double t = path.times.back();
  const double w = path.values.back();
  if (spec.name == "monomial" || spec.name == "expW") {
    CStr err;
    double value = 0.0;
    check(mr_gaussian_moment_expectation(spec.f.get(), t_str.c_str(), w, &value, &err.p), err,
          "moment oracle");
    ref = {true, value, "moment-oracle"};
  } else if (spec.name == "example1") {
    const double variance = spec.tau_val - t;
    ref = {true, std::exp(-w * w / (2.0 * variance)) / std::sqrt(variance), "closed-form"};
  } else if (spec.name == "example2") {
    const double remaining = spec.T_val - t;
    const double value =
        std::exp(std::pow(remaining, 3) / 6.0 - w * remaining - trapezoid_integral(path));
    ref = {true, value, "closed-form"};
  }
  return ref;
}

/* ---- report plumbing ---- */

struct Report {
  std::string command;
  json config;  // resolved parameter echo, defaults applied
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<double> row_wall_ms;  // console only; empty or one entry per row
  json results = json::array();
  json summary;  // omitted from the file when null
  std::vector<std::pair<std::string, std::string>> extra_files;  // suffix -> content
};

void atomic_write(const fs::path& target, const std::string& content) {
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) fail(kExitRuntime, "cannot create output directory: " + target.parent_path().string());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(kExitRuntime, "cannot open output file: " + tmp.string());
    out << content;
    if (!out) fail(kExitRuntime, "failed writing output file: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) fail(kExitRuntime, "failed to move report into place: " + target.string());
}

fs::path resolve_out_base(const std::string& out_flag, const std::string& command) {
  fs::path base = out_flag.empty() ? fs::path(command) : fs::path(out_flag);
  if (base.is_relative()) {
    const char* dir = std::getenv("MARTREP_OUT_DIR");
    if (dir != nullptr && *dir != '\0') base = fs::path(dir) / base;
  }
  return base;
}

std::string render_csv(const Report& report) {
  std::string text;
  for (size_t c = 0; c < report.header.size(); ++c) {
    if (c > 0) text += ',';
    text += csv_escape(report.header[c]);
  }
  text += '\n';
  for (const auto& row : report.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c > 0) text += ',';
      text += csv_escape(row[c]);
    }
    text += '\n';
  }
  return text;
}

std::string render_json(const Report& report) {
  json doc;
  doc["schema_version"] = 1;
  doc["command"] = report.command;
  doc["config"] = report.config;
  doc["results"] = report.results;
  if (!report.summary.is_null()) doc["summary"] = report.summary;
  return doc.dump(2) + "\n";
}

void print_console(const Report& report, const fs::path& base, double total_wall_ms) {
  std::vector<std::string> header = report.header;
  std::vector<std::vector<std::string>> rows = report.rows;
  if (!report.row_wall_ms.empty()) {
    header.push_back("wall_ms");
    for (size_t r = 0; r < rows.size(); ++r)
      rows[r].push_back(r < report.row_wall_ms.size() ? fmt_ms(report.row_wall_ms[r]) : "");
  }
  std::vector<size_t> width(header.size(), 0);
  for (size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows)
    for (size_t c = 0; c < row.size() && c < width.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  auto print_row = [&](const std::vector<std::string>& row) {
    for (size_t c = 0; c < row.size(); ++c) {
      std::cout << row[c];
      if (c + 1 < row.size()) std::cout << std::string(width[c] - row[c].size() + 2, ' ');
    }
    std::cout << '\n';
  };
  print_row(header);
  for (const auto& row : rows) print_row(row);
  if (!report.summary.is_null()) std::cout << "summary: " << report.summary.dump() << '\n';
  std::cout << "wall: " << fmt_ms(total_wall_ms) << " ms\n";
  std::cout << "report: " << base.string() << ".csv, " << base.string() << ".json";
  for (const auto& [suffix, _] : report.extra_files) std::cout << ", " << base.string() << suffix;
  std::cout << '\n';
}

void write_report(const Report& report, const fs::path& base) {
  atomic_write(base.string() + ".csv", render_csv(report));
  atomic_write(base.string() + ".json", render_json(report));
  for (const auto& [suffix, content] : report.extra_files)
    atomic_write(base.string() + suffix, content);
}

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

/* ---- flags ---- */

struct Flags {
  std::string config, functional, t, T, tau, delta, L, M, K, tol, n, seed, path, out, w, grid;
  bool antithetic = false;
  bool parallel = false;
  std::vector<std::string> cases;
  std::map<std::string, CLI::Option*> opts;

  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

// Overlays provided flags onto the config-file document; values stay raw
// strings here and are parsed by the typed getters.
json merged_config(const Flags& flags) {
  json cfg = json::object();
  if (flags.given("config")) cfg = load_config_file(flags.config);
  auto overlay = [&](const char* key, const std::string& value) {
    if (flags.given(key)) cfg[key] = value;
  };
  overlay("functional", flags.functional);
  overlay("t", flags.t);
  overlay("T", flags.T);
  overlay("tau", flags.tau);
  overlay("delta", flags.delta);
  overlay("L", flags.L);
  overlay("M", flags.M);
  overlay("K", flags.K);
  overlay("tol", flags.tol);
  overlay("n", flags.n);
  overlay("seed", flags.seed);
  overlay("path", flags.path);
  overlay("w", flags.w);
  overlay("grid", flags.grid);
  if (flags.given("antithetic")) cfg["antithetic"] = true;
  return cfg;
}

/* ---- gamma ---- */

int cmd_gamma(const Flags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const json cfg = merged_config(flags);
  const auto L = static_cast<unsigned>(get_uint(cfg, "L", 8));
  const std::string delta = get_rational(cfg, "delta", "1/4");
  if (L > 64) fail(kExitConfig, "config field 'L': orders above 64 are not useful");

  Report report;
  report.command = "gamma";
  report.config = json{{"L", L}, {"delta", delta}};
  report.header = {"order", "polynomial", "frozen_value"};
  for (unsigned l = 0; l <= L; ++l) {
    CStr poly, frozen, err;
    check(mr_gamma_to_string(l, &poly.p, &err.p), err, "gamma polynomial");
    check(mr_gamma_evaluate_exact(l, delta.c_str(), "0", &frozen.p, &err.p), err,
          "gamma frozen value");
    report.rows.push_back({std::to_string(l), poly.str(), frozen.str()});
    report.results.push_back(
        json{{"order", l}, {"polynomial", poly.str()}, {"frozen_value", frozen.str()}});
  }
  const fs::path base = resolve_out_base(flags.out, "gamma");
  write_report(report, base);
  print_console(report, base, ms_since(start));
  return 0;
}

/* ---- bte ---- */

int cmd_bte(const Flags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const json cfg = merged_config(flags);
  FunctionalSpec spec = resolve_functional(cfg);
  const auto M = static_cast<unsigned>(get_uint(cfg, "M", 4));
  const auto L = static_cast<unsigned>(get_uint(cfg, "L", 2));
  if (M == 0) fail(kExitConfig, "config field 'M': need at least one step");
  if (!cfg.contains("delta")) fail(kExitConfig, "config field 'delta' is required for bte");
  const std::string delta = get_rational(cfg, "delta", "0");
  const uint64_t term_cap = get_uint(cfg, "term_cap", 1'000'000);

  // the sweep covers [t, T] in M exact steps
  const std::string t_str = rational_fma(spec.T_str, -static_cast<int64_t>(M), delta);
  if (cfg.contains("t") && get_rational(cfg, "t", "0") != t_str)
    fail(kExitConfig, "config field 't' must equal T - M*delta = " + t_str + " (or be omitted)");
  const double t_val = rational_value(t_str);
  if (t_val < 0.0) fail(kExitConfig, "M*delta exceeds the horizon (start time " + t_str + ")");

  BuiltPath path = build_path(path_spec(cfg), t_val, spec.T_val);

  std::vector<double> increments;
  if (cfg.contains("increments")) {
    if (!cfg["increments"].is_array() || cfg["increments"].size() != M)
      fail(kExitConfig, "config field 'increments': expected an array of M numbers");
    for (const json& v : cfg["increments"]) increments.push_back(v.get<double>());
  }

  double value = 0.0;
  {
    CStr err;
    check(mr_bte_sweep(spec.f.get(), path.p.get(), M, delta.c_str(), L,
                       increments.empty() ? nullptr : increments.data(), term_cap, &value,
                       &err.p),
          err, "backward sweep");
  }
  const Reference ref = compute_reference(spec, t_str, path);

  Report report;
  report.command = "bte";
  report.config = json{{"functional", functional_label(spec)},
                       {"T", spec.T_str},
                       {"t", t_str},
                       {"M", M},
                       {"delta", delta},
                       {"L", L},
                       {"path", path.echo},
                       {"term_cap", term_cap}};
  if (spec.name == "example1") report.config["tau"] = spec.tau_str;
  if (!increments.empty()) report.config["increments"] = increments;
  report.header = {"functional", "method", "t",         "T",
                   "M",          "delta",  "L",         "value",
                   "reference",  "ref_source", "abs_error", "rel_error"};
  std::vector<std::string> row{functional_label(spec),
                               "bte",
                               t_str,
                               spec.T_str,
                               std::to_string(M),
                               delta,
                               std::to_string(L),
                               fmt_g(value)};
  json result{{"functional", functional_label(spec)}, {"method", "bte"}, {"value", value}};
  if (ref.has) {
    row.push_back(fmt_g(ref.value));
    row.push_back(ref.source);
    row.push_back(fmt_g(std::fabs(value - ref.value)));
    row.push_back(fmt_g(relative_error(value, ref.value)));
    result["reference"] = ref.value;
    result["ref_source"] = ref.source;
    result["abs_error"] = std::fabs(value - ref.value);
    result["rel_error"] = relative_error(value, ref.value);
  } else {
    row.insert(row.end(), {"", "", "", ""});
    result["reference"] = nullptr;
  }
  report.rows.push_back(row);
  report.results.push_back(result);
  report.summary = result;

  const fs::path base = resolve_out_base(flags.out, "bte");
  write_report(report, base);
  print_console(report, base, ms_since(start));
  return 0;
}

/* ---- dyson ---- */

int cmd_dyson(const Flags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const json cfg = merged_config(flags);
  FunctionalSpec spec = resolve_functional(cfg);
  const auto K = static_cast<unsigned>(get_uint(cfg, "K", 12));
  const uint64_t term_cap = get_uint(cfg, "term_cap", 1'000'000);
  const bool has_tol = cfg.contains("tol");
  const double tol = get_number(cfg, "tol", -1.0);
  if (has_tol && tol <= 0.0) fail(kExitConfig, "config field 'tol': must be positive");

  std::string t_str = get_rational(cfg, "t", "0");
  double t_val = rational_value(t_str);
  json spec_json = path_spec(cfg);
  BuiltPath path = build_path(spec_json, t_val, spec.T_val);
  if (get_string(spec_json, "kind", "zero") == "inline") {
    // an inline path defines t; an explicit config t must agree
    const double end = path.times.back();
    if (cfg.contains("t") && std::fabs(end - t_val) > 1e-12)
      fail(kExitConfig, "config field 't' does not match the inline path end time");
    if (!cfg.contains("t")) t_str = normalize_rational(fmt_g(end), "t");
    t_val = end;
  }

  DysonPtr result;
  {
    mr_dyson_result_t* raw = nullptr;
    CStr err;
    check(mr_dyson_evaluate(spec.f.get(), path.p.get(), K, has_tol ? tol : -1.0, term_cap, &raw,
                            &err.p),
          err, "series evaluation");
    result.reset(raw);
  }
  const Reference ref = compute_reference(spec, t_str, path);

  Report report;
  report.command = "dyson";
  report.config = json{{"functional", functional_label(spec)},
                       {"T", spec.T_str},
                       {"t", t_str},
                       {"K", K},
                       {"path", path.echo},
                       {"term_cap", term_cap}};
  if (spec.name == "example1") report.config["tau"] = spec.tau_str;
  if (has_tol) report.config["tol"] = tol;
  report.header = {"order", "term", "partial_sum", "abs_ratio", "sign"};

  const size_t rows = mr_dyson_result_row_count(result.get());
  double prev_term = 0.0;
  for (size_t i = 0; i < rows; ++i) {
    unsigned order = 0;
    double term = 0.0, partial = 0.0;
    mr_dyson_result_row(result.get(), i, &order, &term, &partial);
    std::string ratio;
    if (i > 0 && prev_term != 0.0) ratio = fmt_g(std::fabs(term) / std::fabs(prev_term));
    const std::string sign = term > 0.0 ? "+" : (term < 0.0 ? "-" : "0");
    report.rows.push_back(
        {std::to_string(order), fmt_g(term), fmt_g(partial), ratio, sign});
    json row{{"order", order}, {"term", term}, {"partial_sum", partial}, {"sign", sign}};
    if (!ratio.empty()) row["abs_ratio"] = std::fabs(term) / std::fabs(prev_term);
    report.results.push_back(row);
    prev_term = term;
  }

  const double value = mr_dyson_result_value(result.get());
  json summary{{"value", value}, {"orders_used", rows == 0 ? 0 : rows - 1}};
  if (has_tol) summary["tolerance_met"] = mr_dyson_result_tolerance_met(result.get()) == 1;
  if (ref.has) {
    summary["reference"] = ref.value;
    summary["ref_source"] = ref.source;
    summary["abs_error"] = std::fabs(value - ref.value);
    summary["rel_error"] = relative_error(value, ref.value);
  } else {
    summary["reference"] = nullptr;
  }
  report.summary = summary;

  const fs::path base = resolve_out_base(flags.out, "dyson");
  write_report(report, base);
  print_console(report, base, ms_since(start));
  return 0;
}

/* ---- mc ---- */

int cmd_mc(const Flags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const json cfg = merged_config(flags);
  FunctionalSpec spec = resolve_functional(cfg);
  const uint64_t n = get_uint(cfg, "n", 100'000);
  const uint64_t seed = get_uint(cfg, "seed", 1);
  const auto grid = static_cast<unsigned>(get_uint(cfg, "grid", 64));
  const bool antithetic = get_bool(cfg, "antithetic", false);

  std::string t_str = get_rational(cfg, "t", "0");
  double t_val = rational_value(t_str);
  json spec_json = path_spec(cfg);
  BuiltPath path = build_path(spec_json, t_val, spec.T_val);
  if (get_string(spec_json, "kind", "zero") == "inline") {
    const double end = path.times.back();
    if (cfg.contains("t") && std::fabs(end - t_val) > 1e-12)
      fail(kExitConfig, "config field 't' does not match the inline path end time");
    if (!cfg.contains("t")) t_str = normalize_rational(fmt_g(end), "t");
    t_val = end;
  }

  double mean = 0.0, se = 0.0;
  uint64_t used = 0, bad = 0;
  {
    CStr err;
    check(mr_mc_conditional_expectation(spec.f.get(), path.p.get(), n, seed, grid,
                                        antithetic ? 1 : 0, &mean, &se, &used, &bad, &err.p),
          err, "monte carlo");
  }
  const Reference ref = compute_reference(spec, t_str, path);

  Report report;
  report.command = "mc";
  report.config = json{{"functional", functional_label(spec)},
                       {"T", spec.T_str},
                       {"t", t_str},
                       {"n", n},
                       {"seed", seed},
                       {"grid", grid},
                       {"antithetic", antithetic},
                       {"path", path.echo}};
  if (spec.name == "example1") report.config["tau"] = spec.tau_str;
  report.header = {"functional", "method",       "t",         "T",          "n",
                   "seed",       "grid",         "antithetic", "value",     "std_error",
                   "samples_used", "non_finite", "reference",  "ref_source", "abs_error",
                   "rel_error"};
  std::vector<std::string> row{functional_label(spec),
                               "mc",
                               t_str,
                               spec.T_str,
                               std::to_string(n),
                               std::to_string(seed),
                               std::to_string(grid),
                               antithetic ? "true" : "false",
                               fmt_g(mean),
                               fmt_g(se),
                               std::to_string(used),
                               std::to_string(bad)};
  json result{{"functional", functional_label(spec)}, {"method", "mc"},      {"value", mean},
              {"std_error", se},                      {"samples_used", used}, {"non_finite", bad}};
  if (ref.has) {
    row.push_back(fmt_g(ref.value));
    row.push_back(ref.source);
    row.push_back(fmt_g(std::fabs(mean - ref.value)));
    row.push_back(fmt_g(relative_error(mean, ref.value)));
    result["reference"] = ref.value;
    result["ref_source"] = ref.source;
    result["abs_error"] = std::fabs(mean - ref.value);
    result["rel_error"] = relative_error(mean, ref.value);
  } else {
    row.insert(row.end(), {"", "", "", ""});
    result["reference"] = nullptr;
  }
  report.rows.push_back(row);
  report.results.push_back(result);
  report.summary = result;

  const fs::path base = resolve_out_base(flags.out, "mc");
  write_report(report, base);
  print_console(report, base, ms_since(start));
  return 0;
}

/* ---- oracle ---- */

int cmd_oracle(const Flags& flags) {
  const auto start = std::chrono::steady_clock::now();
  const json cfg = merged_config(flags);
  FunctionalSpec spec = resolve_functional(cfg);
  const std::string t_str = get_rational(cfg, "t", "0");
  const double w = get_number(cfg, "w", 0.0);

  double value = 0.0;
  {
    CStr err;
    check(mr_gaussian_moment_expectation(spec.f.get(), t_str.c_str(), w, &value, &err.p), err,
          "moment oracle");
  }

  Report report;
  report.command = "oracle";
  report.config = json{
      {"functional", functional_label(spec)}, {"T", spec.T_str}, {"t", t_str}, {"w", w}};
  report.header = {"functional", "method", "t", "w", "value"};
  report.rows.push_back(
      {functional_label(spec), "moment-oracle", t_str, fmt_g(w), fmt_g(value)});
  report.results.push_back(json{{"functional", functional_label(spec)},
                                {"method", "moment-oracle"},
                                {"t", t_str},
                                {"w", w},
                                {"value", value}});

  const fs::path base = resolve_out_base(flags.out, "oracle");
  write_report(report, base);
  print_console(report, base, ms_since(start));
  return 0;
}

/* ---- convergence ---- */

struct FitResult {
  std::string status;  // "fit" or "exact"
  double slope = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log10 delta, log10 mse)
};

FitResult fit_loglog(unsigned L, const std::vector<double>& deltas,
                     const std::vector<double>& mses) {
  FitResult fit;
  bool all_zero = true;
  for (size_t i = 0; i < deltas.size(); ++i) {
    if (mses[i] > 1e-26) all_zero = false;
    if (mses[i] > 0.0 && std::isfinite(mses[i]))
      fit.points.emplace_back(std::log10(deltas[i]), std::log10(mses[i]));
  }
  if (all_zero) {
    fit.status = "exact";
    return fit;
  }
  if (fit.points.size() < 4)
    fail(kExitRuntime, "convergence fit for L=" + std::to_string(L) +
                           ": fewer than 4 finite points, cannot estimate a slope");
  double sx = 0, sy = 0;
  for (const auto& [x, y] : fit.points) sx += x, sy += y;
  const double n = double(fit.points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, ss_tot = 0;
  for (const auto& [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    ss_tot += (y - my) * (y - my);
  }
  fit.slope = sxy / sxx;
  double ss_res = 0;
  for (const auto& [x, y] : fit.points) {
    const double predicted = my + fit.slope * (x - mx);
    ss_res += (y - predicted) * (y - predicted);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.status = "fit";
  return fit;
}

// One-step mean-square error study: for each (L, delta), draw increments
// dW ~ N(0, delta), form the order-L one-step backward value at t = 0 with
// horizon delta, and compare against the moment oracle. Theory predicts the
// MSE scales like delta^(L+1).
int cmd_convergence(const Flags& flags) {
  const auto start = std::chrono::steady_clock::now();
  json cfg = merged_config(flags);
  if (!cfg.contains("functional")) cfg["functional"] = "expW";
  const std::string functional = get_string(cfg, "functional", "expW");
  if (functional != "expW" && functional.rfind("monomial(", 0) != 0)
    fail(kExitConfig,
         "config field 'functional': the convergence study needs a moment-oracle "
         "functional (expW or monomial(n))");

  std::vector<unsigned> L_list;
  if (cfg.contains("L")) {
    const json& v = cfg.at("L");
    if (v.is_array())
      for (const json& item : v) L_list.push_back(static_cast<unsigned>(item.get<uint64_t>()));
    else if (v.is_string())
      for (const std::string& part : split_list(v.get<std::string>()))
        L_list.push_back(static_cast<unsigned>(std::strtoul(part.c_str(), nullptr, 10)));
    else
      L_list.push_back(static_cast<unsigned>(get_uint(cfg, "L", 1)));
  } else {
    L_list = {1, 2, 3};
  }
  std::vector<std::string> delta_list;
  if (cfg.contains("delta")) {
    const json& v = cfg.at("delta");
    if (v.is_array())
      for (const json& item : v)
        delta_list.push_back(normalize_rational(item.get<std::string>(), "delta"));
    else if (v.is_string())
      for (const std::string& part : split_list(v.get<std::string>()))
        delta_list.push_back(normalize_rational(part, "delta"));
    else
      fail(kExitConfig, "config field 'delta': expected a list of rational strings");
  } else {
    delta_list = {"1/8", "1/16", "1/32", "1/64", "1/128"};
  }
  if (delta_list.size() < 4)
    fail(kExitConfig, "config field 'delta': the study needs at least 4 step sizes");
  for (const std::string& d : delta_list) {
    const double v = rational_value(d);
    if (!(v > 0.0 && v < 1.0))
      fail(kExitConfig, "config field 'delta': step sizes must lie in (0, 1), got " + d);
  }
  const uint64_t n = get_uint(cfg, "n", 10'000);
  const uint64_t seed = get_uint(cfg, "seed", 12'345);
  if (n < 2) fail(kExitConfig, "config field 'n': need at least 2 draws");

  Report report;
  report.command = "convergence";
  report.config = json{{"functional", functional},
                       {"L", L_list},
                       {"delta", delta_list},
                       {"n", n},
                       {"seed", seed}};
  report.header = {"L", "delta", "mse", "draws", "slope", "r_squared", "status"};
  json fits = json::array();

  uint64_t case_index = 0;
  for (const unsigned L : L_list) {
    std::vector<double> delta_values, mse_values;
    for (const std::string& delta : delta_list) {
      const double delta_val = rational_value(delta);

      // per-delta functional with horizon = delta: one step spans [0, delta]
      json sub_cfg{{"functional", functional}, {"T", delta}};
      FunctionalSpec spec = resolve_functional(sub_cfg);

      // the order-l endpoint derivatives at the step end, built once
      std::vector<FunctionalPtr> derivatives;
      for (unsigned l = 0; l <= L; ++l) {
        mr_functional_t* d = nullptr;
        CStr err;
        check(mr_functional_malliavin_at_time(spec.f.get(), l, delta.c_str(), &d, &err.p), err,
              "endpoint derivative");
        derivatives.emplace_back(d);
      }
      double reference = 0.0;
      {
        CStr err;
        check(mr_gaussian_moment_expectation(spec.f.get(), "0", 0.0, &reference, &err.p), err,
              "moment oracle");
      }

      double sum_sq = 0.0;
      const double times[2] = {0.0, delta_val};
      for (uint64_t i = 0; i < n; ++i) {
        const double dw = std::sqrt(delta_val) * mr_normal_draw(seed, i, case_index);
        const double values[2] = {0.0, dw};
        mr_path_t* raw = nullptr;
        CStr perr;
        check(mr_path_create(times, values, 2, delta_val, &raw, &perr.p), perr, "draw path");
        PathPtr path(raw);
        double estimate = 0.0;
        for (unsigned l = 0; l <= L; ++l) {
          double weight = 0.0, term = 0.0;
          CStr err;
          check(mr_gamma_evaluate(l, delta_val, dw, &weight, &err.p), err, "gamma weight");
          if (weight == 0.0) continue;
          check(mr_functional_evaluate_full_path(derivatives[l].get(), path.get(), &term,
                                                 &err.p),
                err, "derivative evaluation");
          estimate += weight * term;
        }
        const double diff = estimate - reference;
        sum_sq += diff * diff;
      }
      const double mse = sum_sq / double(n);
      delta_values.push_back(delta_val);
      mse_values.push_back(mse);
      ++case_index;
    }

    const FitResult fit = fit_loglog(L, delta_values, mse_values);
    std::string plot = "# log10_delta log10_mse\n";
    for (const auto& [x, y] : fit.points) plot += fmt_g(x) + " " + fmt_g(y) + "\n";
    if (fit.status == "exact") plot += "# exact scheme: every mse is at machine zero\n";
    report.extra_files.emplace_back("_L" + std::to_string(L) + ".dat", plot);

    for (size_t i = 0; i < delta_list.size(); ++i) {
      report.rows.push_back({std::to_string(L), delta_list[i], fmt_g(mse_values[i]),
                             std::to_string(n),
                             fit.status == "fit" ? fmt_g(fit.slope) : "",
                             fit.status == "fit" ? fmt_g(fit.r_squared) : "", fit.status});
      report.results.push_back(json{{"L", L},
                                    {"delta", delta_list[i]},
                                    {"mse", mse_values[i]},
                                    {"draws", n},
                                    {"status", fit.status}});
    }
    json fit_json{{"L", L}, {"status", fit.status}};
    if (fit.status == "fit") {
      fit_json["slope"] = fit.slope;
      fit_json["r_squared"] = fit.r_squared;
    }
    fits.push_back(fit_json);
  }
  report.summary = json{{"fits", fits}};

  const fs::path base = resolve_out_base(flags.out, "convergence");
  write_report(report, base);
  print_console(report, base, ms_since(start));
  return 0;
}

/* ---- golden ---- */

struct GoldenOutcome {
  std::string name;
  std::string method;
  json params;
  double value = 0.0;
  double reference = 0.0;
  std::string tolerance_desc;
  double abs_error = 0.0;
  double rel_error = 0.0;
  bool passed = false;
  std::string note;
  bool errored = false;
  int error_code = 0;
  std::string error_message;
  double wall_ms = 0.0;
};

struct GoldenCase {
  std::string name;
  std::function<GoldenOutcome()> run;
};

PathPtr point_path(const std::string& horizon) {
  mr_path_t* raw = nullptr;
  CStr err;
  check(mr_path_zero(0.0, 0, rational_value(horizon), &raw, &err.p), err, "point path");
  return PathPtr(raw);
}

double dyson_value(const FunctionalPtr& f, const PathPtr& path, unsigned K) {
  mr_dyson_result_t* raw = nullptr;
  CStr err;
  check(mr_dyson_evaluate(f.get(), path.get(), K, -1.0, 1'000'000, &raw, &err.p), err,
        "series evaluation");
  DysonPtr result(raw);
  return mr_dyson_result_value(result.get());
}

GoldenOutcome against_reference(GoldenOutcome outcome, double value, double reference,
                                double rel_tolerance) {
  outcome.value = value;
  outcome.reference = reference;
  outcome.abs_error = std::fabs(value - reference);
  outcome.rel_error = relative_error(value, reference);
  outcome.tolerance_desc = "rel<=" + fmt_g(rel_tolerance);
  outcome.passed = outcome.rel_error <= rel_tolerance;
  return outcome;
}

std::vector<GoldenCase> golden_cases() {
  std::vector<GoldenCase> cases;

  cases.push_back({"gamma-frozen-values", [] {
    GoldenOutcome o;
    o.name = "gamma-frozen-values";
    o.method = "gamma";
    o.params = json{{"delta", "1/4"}};
    auto frozen = [](unsigned l) {
      CStr s, e;
      check(mr_gamma_evaluate_exact(l, "1/4", "0", &s.p, &e.p), e, "gamma frozen value");
      return s.str();
    };
    auto text = [](unsigned l) {
      CStr s, e;
      check(mr_gamma_to_string(l, &s.p, &e.p), e, "gamma polynomial");
      return s.str();
    };
    unsigned mismatches = 0;
    mismatches += frozen(1) != "0";
    mismatches += frozen(2) != "1/8";
    mismatches += frozen(3) != "0";
    mismatches += frozen(4) != "1/128";
    mismatches += text(1) != "-x";
    mismatches += text(2) != "1/2*delta + 1/2*x^2";
    o.value = mismatches;
    o.reference = 0.0;
    o.tolerance_desc = "exact";
    o.abs_error = mismatches;
    o.rel_error = mismatches;
    o.passed = mismatches == 0;
    o.note = "orders 1..4 frozen at delta=1/4 plus polynomial text";
    return o;
  }});

  cases.push_back({"example1-dyson-t0", [] {
    GoldenOutcome o;
    o.name = "example1-dyson-t0";
    o.method = "dyson";
    o.params = json{{"tau", "2"}, {"T", "1"}, {"t", "0"}, {"K", 12}, {"path", "zero"}};
    mr_functional_t* raw = nullptr;
    CStr err;
    check(mr_functional_heat_kernel("2", "1", &raw, &err.p), err, "building example1");
    FunctionalPtr f(raw);
    PathPtr path = point_path("1");
    const double value = dyson_value(f, path, 12);
    o = against_reference(std::move(o), value, 1.0 / std::sqrt(2.0), 1e-6);
    o.note = "K=12 partial sum; the series converges too slowly at this parameter point";
    return o;
  }});

  cases.push_back({"example1-dyson-t05", [] {
    GoldenOutcome o;
    o.name = "example1-dyson-t05";
    o.method = "dyson";
    o.params = json{{"tau", "2"}, {"T", "1"},
                    {"t", "1/2"}, {"K", 12},
                    {"path", json{{"kind", "linear"}, {"slope", "3/5"}, {"steps", 8}}}};
    mr_functional_t* raw = nullptr;
    CStr err;
    check(mr_functional_heat_kernel("2", "1", &raw, &err.p), err, "building example1");
    FunctionalPtr f(raw);
    BuiltPath path = build_path(o.params["path"], 0.5, 1.0);
    const double value = [&] {
      mr_dyson_result_t* r = nullptr;
      CStr derr;
      check(mr_dyson_evaluate(f.get(), path.p.get(), 12, -1.0, 1'000'000, &r, &derr.p), derr,
            "series evaluation");
      DysonPtr result(r);
      return mr_dyson_result_value(result.get());
    }();
    const double w = path.values.back();
    const double reference = std::exp(-w * w / (2.0 * 1.5)) / std::sqrt(1.5);
    o = against_reference(std::move(o), value, reference, 1e-5);
    o.note = "prefix reaching W(1/2)=3/10";
    return o;
  }});

  cases.push_back({"example2-term-factorization", [] {
    GoldenOutcome o;
    o.name = "example2-term-factorization";
    o.method = "dyson-term";
    o.params = json{{"T", "1"}, {"t", "0"}, {"orders", "0..5"}, {"path", "zero"}};
    FunctionalPtr f = make_functional(mr_functional_exp_integral, "1", "building example2");
    PathPtr path = point_path("1");
    double worst = 0.0;
    double expected = 1.0;  // (1/6)^k / k!
    for (unsigned k = 0; k <= 5; ++k) {
      if (k > 0) expected *= (1.0 / 6.0) / double(k);
      double term = 0.0;
      CStr err;
      check(mr_dyson_term(f.get(), path.get(), k, 1'000'000, &term, &err.p), err,
            "series term");
      worst = std::max(worst, std::fabs(term - expected) / std::fabs(expected));
    }
    o.value = worst;
    o.reference = 0.0;
    o.tolerance_desc = "rel<=1e-12 per order";
    o.abs_error = worst;
    o.rel_error = worst;
    o.passed = worst <= 1e-12;
    o.note = "max deviation from the factored form over orders 0..5";
    return o;
  }});

  cases.push_back({"example2-dyson-t0", [] {
    GoldenOutcome o;
    o.name = "example2-dyson-t0";
    o.method = "dyson";
    o.params = json{{"T", "1"}, {"t", "0"}, {"K", 12}, {"path", "zero"}};
    FunctionalPtr f = make_functional(mr_functional_exp_integral, "1", "building example2");
    PathPtr path = point_path("1");
    const double value = dyson_value(f, path, 12);
    o = against_reference(std::move(o), value, std::exp(1.0 / 6.0), 1e-9);
    return o;
  }});

  cases.push_back({"example2-dyson-linear", [] {
    GoldenOutcome o;
    o.name = "example2-dyson-linear";
    o.method = "dyson";
    o.params = json{{"T", "1"}, {"t", "1/2"}, {"K", 12},
                    {"path", json{{"kind", "linear"}, {"slope", "1/4"}, {"steps", 8}}}};
    FunctionalPtr f = make_functional(mr_functional_exp_integral, "1", "building example2");
    BuiltPath path = build_path(o.params["path"], 0.5, 1.0);
    const double value = [&] {
      mr_dyson_result_t* r = nullptr;
      CStr derr;
      check(mr_dyson_evaluate(f.get(), path.p.get(), 12, -1.0, 1'000'000, &r, &derr.p), derr,
            "series evaluation");
      DysonPtr result(r);
      return mr_dyson_result_value(result.get());
    }();
    const double w = path.values.back();
    const double remaining = 0.5;
    const double reference =
        std::exp(std::pow(remaining, 3) / 6.0 - w * remaining - trapezoid_integral(path));
    o = against_reference(std::move(o), value, reference, 1e-9);
    o.note = "linear prefix W(u)=u/4";
    return o;
  }});

  cases.push_back({"monomial2-bte", [] {
    GoldenOutcome o;
    o.name = "monomial2-bte";
    o.method = "bte";
    o.params = json{{"T", "1"}, {"M", 4}, {"delta", "1/4"}, {"L", 2}, {"increments", "frozen"}};
    mr_functional_t* raw = nullptr;
    CStr err;
    check(mr_functional_wiener_power(2, "1", &raw, &err.p), err, "building monomial");
    FunctionalPtr f(raw);
    PathPtr start = point_path("1");
    double value = 0.0;
    CStr serr;
    check(mr_bte_sweep(f.get(), start.get(), 4, "1/4", 2, nullptr, 1'000'000, &value, &serr.p),
          serr, "backward sweep");
    double reference = 0.0;
    CStr oerr;
    check(mr_gaussian_moment_expectation(f.get(), "0", 0.0, &reference, &oerr.p), oerr,
          "moment oracle");
    o = against_reference(std::move(o), value, reference, 1e-12);
    o.note = "order covers the degree, scheme is exact";
    return o;
  }});

  cases.push_back({"expw-bte-l6", [] {
    GoldenOutcome o;
    o.name = "expw-bte-l6";
    o.method = "bte";
    o.params = json{{"T", "1"}, {"M", 4}, {"delta", "1/4"}, {"L", 6}, {"increments", "frozen"}};
    FunctionalPtr f = make_functional(mr_functional_exp_wiener, "1", "building expW");
    PathPtr start = point_path("1");
    double value = 0.0;
    CStr serr;
    check(mr_bte_sweep(f.get(), start.get(), 4, "1/4", 6, nullptr, 1'000'000, &value, &serr.p),
          serr, "backward sweep");
    double reference = 0.0;
    CStr oerr;
    check(mr_gaussian_moment_expectation(f.get(), "0", 0.0, &reference, &oerr.p), oerr,
          "moment oracle");
    o = against_reference(std::move(o), value, reference, 5e-5);
    return o;
  }});

  cases.push_back({"example2-mc", [] {
    GoldenOutcome o;
    o.name = "example2-mc";
    o.method = "mc";
    o.params = json{{"T", "1"}, {"t", "0"},          {"n", 100000},
                    {"seed", 90210}, {"grid", 64},   {"antithetic", false}};
    FunctionalPtr f = make_functional(mr_functional_exp_integral, "1", "building example2");
    PathPtr path = point_path("1");
    double mean = 0.0, se = 0.0;
    uint64_t used = 0, bad = 0;
    CStr err;
    check(mr_mc_conditional_expectation(f.get(), path.get(), 100000, 90210, 64, 0, &mean, &se,
                                        &used, &bad, &err.p),
          err, "monte carlo");
    o.value = mean;
    o.reference = std::exp(1.0 / 6.0);
    o.abs_error = std::fabs(mean - o.reference);
    o.rel_error = relative_error(mean, o.reference);
    const double band = 3.0 * se;
    o.tolerance_desc = "abs<=3*se=" + fmt_g(band);
    o.passed = o.abs_error <= band;
    o.note = "se=" + fmt_g(se) + "; non_finite=" + std::to_string(bad);
    return o;
  }});

  return cases;
}

int cmd_golden(const Flags& flags) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<GoldenCase> cases = golden_cases();

  std::vector<std::string> selected;
  if (flags.given("config")) {
    const json cfg = load_config_file(flags.config);
    if (cfg.contains("cases")) {
      if (!cfg["cases"].is_array())
        fail(kExitConfig, "config field 'cases': expected an array of case names");
      for (const json& v : cfg["cases"]) selected.push_back(v.get<std::string>());
    }
  }
  for (const std::string& name : flags.cases) selected.push_back(name);
  if (!selected.empty()) {
    std::vector<GoldenCase> filtered;
    for (const std::string& name : selected) {
      bool found = false;
      for (GoldenCase& c : cases)
        if (c.name == name) {
          filtered.push_back(std::move(c));
          found = true;
          break;
        }
      if (!found) fail(kExitConfig, "unknown golden case: " + name);
    }
    cases = std::move(filtered);
  }

  auto run_case = [](const GoldenCase& c) {
    const auto case_start = std::chrono::steady_clock::now();
    GoldenOutcome outcome;
    try {
      outcome = c.run();
    } catch (const CliError& e) {
      outcome.name = c.name;
      outcome.errored = true;
      outcome.error_code = e.code;
      outcome.error_message = e.message;
    }
    outcome.wall_ms = ms_since(case_start);
    return outcome;
  };

  std::vector<GoldenOutcome> outcomes;
  if (flags.parallel) {
    std::vector<std::future<GoldenOutcome>> futures;
    futures.reserve(cases.size());
    for (const GoldenCase& c : cases)
      futures.push_back(std::async(std::launch::async, run_case, std::cref(c)));
    for (auto& fut : futures) outcomes.push_back(fut.get());
  } else {
    for (const GoldenCase& c : cases) outcomes.push_back(run_case(c));
  }

  Report report;
  report.command = "golden";
  json case_names = json::array();
  for (const GoldenCase& c : cases) case_names.push_back(c.name);
  report.config = json{{"cases", case_names}};
  report.header = {"case", "method", "value",  "reference", "abs_error",
                   "rel_error", "tolerance", "status", "note"};

  unsigned passed = 0, failed = 0, errored = 0;
  for (const GoldenOutcome& o : outcomes) {
    report.row_wall_ms.push_back(o.wall_ms);
    if (o.errored) {
      ++errored;
      report.rows.push_back({o.name, "", "", "", "", "", "", "error", o.error_message});
      report.results.push_back(
          json{{"case", o.name}, {"status", "error"}, {"message", o.error_message}});
      continue;
    }
    (o.passed ? passed : failed) += 1;
    report.rows.push_back({o.name, o.method, fmt_g(o.value), fmt_g(o.reference),
                           fmt_g(o.abs_error), fmt_g(o.rel_error), o.tolerance_desc,
                           o.passed ? "pass" : "fail", o.note});
    report.results.push_back(json{{"case", o.name},
                                  {"method", o.method},
                                  {"params", o.params},
                                  {"value", o.value},
                                  {"reference", o.reference},
                                  {"abs_error", o.abs_error},
                                  {"rel_error", o.rel_error},
                                  {"tolerance", o.tolerance_desc},
                                  {"status", o.passed ? "pass" : "fail"},
                                  {"note", o.note}});
  }
  report.summary = json{{"total", outcomes.size()},
                        {"passed", passed},
                        {"failed", failed},
                        {"errors", errored}};

  const fs::path base = resolve_out_base(flags.out, "golden");
  write_report(report, base);
  print_console(report, base, ms_since(start));
  if (errored > 0) return kExitRuntime;
  if (failed > 0) return kExitGolden;
  return 0;
}

/* ---- wiring ---- */

void add_flag_set(CLI::App* sub, Flags& flags, const std::vector<const char*>& names) {
  for (const char* raw : names) {
    const std::string name = raw;
    CLI::Option* opt = nullptr;
    if (name == "config")
      opt = sub->add_option("--config", flags.config, "JSON experiment config file");
    else if (name == "functional")
      opt = sub->add_option("--functional", flags.functional,
                            "example1 | example2 | monomial(n) | expW | serialized text");
    else if (name == "t")
      opt = sub->add_option("--t", flags.t, "observation time (rational string)");
    else if (name == "T")
      opt = sub->add_option("--T", flags.T, "horizon (rational string, default 1)");
    else if (name == "tau")
      opt = sub->add_option("--tau", flags.tau, "example1 time parameter (rational string)");
    else if (name == "delta")
      opt = sub->add_option("--delta", flags.delta, "step size (rational string)");
    else if (name == "delta-list")
      opt = sub->add_option("--delta", flags.delta,
                            "comma-separated step sizes, e.g. 1/8,1/16,1/32,1/64");
    else if (name == "L")
      opt = sub->add_option("--L", flags.L, "truncation order");
    else if (name == "L-list")
      opt = sub->add_option("--L", flags.L, "comma-separated truncation orders, e.g. 1,2,3");
    else if (name == "M")
      opt = sub->add_option("--M", flags.M, "number of backward steps");
    else if (name == "K")
      opt = sub->add_option("--K", flags.K, "maximum series order");
    else if (name == "tol")
      opt = sub->add_option("--tol", flags.tol, "early-stop tolerance");
    else if (name == "n")
      opt = sub->add_option("--n", flags.n, "sample count");
    else if (name == "seed")
      opt = sub->add_option("--seed", flags.seed, "random stream seed");
    else if (name == "grid")
      opt = sub->add_option("--grid", flags.grid, "Monte Carlo continuation grid steps");
    else if (name == "path")
      opt = sub->add_option("--path", flags.path,
                            "prefix spec: zero[:steps] | linear[:slope[:steps]] | "
                            "random[:seed[:steps]]");
    else if (name == "w")
      opt = sub->add_option("--w", flags.w, "observed endpoint value W(t)");
    else if (name == "out")
      opt = sub->add_option("--out", flags.out,
                            "report base path (writes <out>.csv and <out>.json)");
    else if (name == "antithetic")
      opt = sub->add_flag("--antithetic", flags.antithetic, "antithetic variates");
    else if (name == "parallel")
      opt = sub->add_flag("--parallel", flags.parallel, "run cases concurrently");
    else if (name == "case")
      opt = sub->add_option("--case", flags.cases, "run only the named case (repeatable)");
    flags.opts[name == "delta-list" ? "delta" : (name == "L-list" ? "L" : name)] = opt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symbolic Wiener functionals: backward Taylor expansion, Dyson series, "
               "Monte Carlo and exact oracles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mr_version()));

  Flags gamma_flags, bte_flags, dyson_flags, mc_flags, oracle_flags, conv_flags, golden_flags;

  CLI::App* gamma = app.add_subcommand("gamma", "print expansion coefficient polynomials");
  add_flag_set(gamma, gamma_flags, {"config", "L", "delta", "out"});

  CLI::App* bte = app.add_subcommand("bte", "backward Taylor expansion sweep");
  add_flag_set(bte, bte_flags,
               {"config", "functional", "t", "T", "tau", "delta", "L", "M", "path", "out"});

  CLI::App* dyson = app.add_subcommand("dyson", "time-ordered series evaluation");
  add_flag_set(dyson, dyson_flags,
               {"config", "functional", "t", "T", "tau", "K", "tol", "path", "out"});

  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo conditional expectation");
  add_flag_set(mc, mc_flags, {"config", "functional", "t", "T", "tau", "n", "seed", "grid",
                              "antithetic", "path", "out"});

  CLI::App* oracle = app.add_subcommand("oracle", "exact Gaussian-moment expectation");
  add_flag_set(oracle, oracle_flags, {"config", "functional", "t", "T", "w", "out"});

  CLI::App* convergence =
      app.add_subcommand("convergence", "one-step mean-square error rate study");
  add_flag_set(convergence, conv_flags,
               {"config", "functional", "L-list", "delta-list", "n", "seed", "out"});

  CLI::App* golden = app.add_subcommand("golden", "run the built-in golden cases");
  add_flag_set(golden, golden_flags, {"config", "case", "parallel", "out"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (gamma->parsed()) return cmd_gamma(gamma_flags);
    if (bte->parsed()) return cmd_bte(bte_flags);
    if (dyson->parsed()) return cmd_dyson(dyson_flags);
    if (mc->parsed()) return cmd_mc(mc_flags);
    if (oracle->parsed()) return cmd_oracle(oracle_flags);
    if (convergence->parsed()) return cmd_convergence(conv_flags);
    if (golden->parsed()) return cmd_golden(golden_flags);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
