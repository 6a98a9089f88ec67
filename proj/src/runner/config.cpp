#include "sslab/runner/config.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sslab/drift/mollify.hpp"
#include "sslab/sde/martingale.hpp"

namespace sslab::runner {

namespace {

const std::vector<std::pair<Experiment, std::string>>& experiment_names() {
  static const std::vector<std::pair<Experiment, std::string>> names{
      {Experiment::certify, "certify"},   {Experiment::solve, "solve"},
      {Experiment::energy, "energy"},     {Experiment::supbound, "supbound"},
      {Experiment::dgiter, "dgiter"},     {Experiment::hitting_scan, "hitting-scan"},
      {Experiment::martingale, "martingale"}, {Experiment::krylov, "krylov"},
      {Experiment::scaling, "scaling"}};
  return names;
}

enum class Kind { real, integer, count, text, reals, integers, windows, flag };

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::real: return "number";
    case Kind::integer: return "integer";
    case Kind::count: return "non-negative integer";
    case Kind::text: return "string";
    case Kind::reals: return "list of numbers";
    case Kind::integers: return "list of integers";
    case Kind::windows: return "list of t0:t1 windows";
    case Kind::flag: return "boolean";
  }
  return "?";
}

struct Value {
  double real = 0.0;
  long long integer = 0;
  std::string text;
  std::vector<double> reals;
  std::vector<int> integers;
  std::vector<sde::TimeWindow> windows;
  bool flag = false;
};

std::string canonical(Kind kind, const Value& v) {
  std::vector<std::string> parts;
  switch (kind) {
    case Kind::real: return fmt(v.real);
    case Kind::integer:
    case Kind::count: return std::to_string(v.integer);
    case Kind::text: return v.text;
    case Kind::flag: return v.flag ? "true" : "false";
    case Kind::reals:
      for (double x : v.reals) parts.push_back(fmt(x));
      break;
    case Kind::integers:
      for (int x : v.integers) parts.push_back(std::to_string(x));
      break;
    case Kind::windows:
      for (const auto& w : v.windows) parts.push_back(fmt(w.t0) + ":" + fmt(w.t1));
      break;
  }
  return join(parts, ',');
}

Value parse_value(Kind kind, const std::string& raw) {
  Value v;
  const std::string s = trim(raw);
  switch (kind) {
    case Kind::real: v.real = parse_double(s); break;
    case Kind::integer: v.integer = parse_int(s); break;
    case Kind::count:
      v.integer = parse_int(s);
      if (v.integer < 0) fail(ErrorCode::invalid_parameter, "negative count '" + s + "'");
      break;
    case Kind::text:
      v.text = s;
      if (v.text.size() >= 2 && v.text.front() == '"' && v.text.back() == '"') v.text = v.text.substr(1, v.text.size() - 2);
      break;
    case Kind::reals: v.reals = parse_list(s, ','); break;
    case Kind::integers:
      if (!s.empty())
        for (const auto& part : split(s, ',')) v.integers.push_back(static_cast<int>(parse_int(part)));
      break;
    case Kind::windows:
      if (!s.empty())
        for (const auto& part : split(s, ',')) {
          const auto ends = split(trim(part), ':');
          if (ends.size() != 2) fail(ErrorCode::invalid_parameter, "window '" + trim(part) + "' is not t0:t1");
          v.windows.push_back({parse_double(ends[0]), parse_double(ends[1])});
        }
      break;
    case Kind::flag:
      if (s == "true" || s == "1" || s == "yes" || s == "on")
        v.flag = true;
      else if (s == "false" || s == "0" || s == "no" || s == "off")
        v.flag = false;
      else
        fail(ErrorCode::invalid_parameter, "not a boolean: '" + s + "'");
      break;
  }
  return v;
}

struct Field {
  Kind kind;
  std::function<void(ExperimentConfig&, const Value&)> set;
};

const std::map<std::string, Field>& schema() {
  using C = ExperimentConfig;
  using V = Value;
  static const std::map<std::string, Field> fields{
      {"run.experiment",
       {Kind::text,
        [](C& c, const V& v) {
          const auto e = experiment_from_string(v.text);
          if (!e) fail(ErrorCode::config_error, "unknown experiment '" + v.text + "'");
          c.experiment = *e;
        }}},
      {"run.output", {Kind::text, [](C& c, const V& v) { c.output = v.text; }}},
      {"run.seed", {Kind::count, [](C& c, const V& v) { c.seed = static_cast<std::uint64_t>(v.integer); }}},
      {"run.jobs", {Kind::count, [](C& c, const V& v) { c.jobs = static_cast<int>(v.integer); }}},
      {"drift.id", {Kind::text, [](C& c, const V& v) { c.drift.id = v.text; }}},
      {"drift.kind", {Kind::text, [](C& c, const V& v) { c.drift.kind = v.text; }}},
      {"drift.d", {Kind::integer, [](C& c, const V& v) { c.drift.d = static_cast<int>(v.integer); }}},
      {"drift.delta", {Kind::real, [](C& c, const V& v) { c.drift.delta = v.real; }}},
      {"drift.amp", {Kind::real, [](C& c, const V& v) { c.drift.amp = v.real; }}},
      {"drift.a", {Kind::real, [](C& c, const V& v) { c.drift.a = v.real; }}},
      {"drift.width", {Kind::real, [](C& c, const V& v) { c.drift.width = v.real; }}},
      {"drift.v", {Kind::reals, [](C& c, const V& v) { c.drift.v = v.reals; }}},
      {"drift.n", {Kind::count, [](C& c, const V& v) { c.drift.n = static_cast<int>(v.integer); }}},
      {"grid.h", {Kind::real, [](C& c, const V& v) { c.grid.h = v.real; }}},
      {"grid.tau", {Kind::real, [](C& c, const V& v) { c.grid.tau = v.real; }}},
      {"grid.T", {Kind::real, [](C& c, const V& v) { c.grid.T = v.real; }}},
      {"grid.L", {Kind::real, [](C& c, const V& v) { c.grid.L = v.real; }}},
      {"mc.M", {Kind::count, [](C& c, const V& v) { c.mc.M = static_cast<std::size_t>(v.integer); }}},
      {"mc.dt", {Kind::real, [](C& c, const V& v) { c.mc.dt = v.real; }}},
      {"mc.T", {Kind::real, [](C& c, const V& v) { c.mc.T = v.real; }}},
      {"mc.x0", {Kind::reals, [](C& c, const V& v) { c.mc.x0 = v.reals; }}},
      {"mc.cap", {Kind::real, [](C& c, const V& v) { c.mc.cap = v.real; }}},
      {"analysis.p", {Kind::real, [](C& c, const V& v) { c.analysis.p = v.real; }}},
      {"analysis.theta", {Kind::real, [](C& c, const V& v) { c.analysis.theta = v.real; }}},
      {"analysis.kappa", {Kind::real, [](C& c, const V& v) { c.analysis.kappa = v.real; }}},
      {"analysis.beta", {Kind::real, [](C& c, const V& v) { c.analysis.beta = v.real; }}},
      {"analysis.windows", {Kind::windows, [](C& c, const V& v) { c.analysis.windows = v.windows; }}},
      {"analysis.epsilon", {Kind::real, [](C& c, const V& v) { c.analysis.epsilon = v.real; }}},
      {"analysis.deltas", {Kind::reals, [](C& c, const V& v) { c.analysis.deltas = v.reals; }}},
      {"analysis.ns", {Kind::integers, [](C& c, const V& v) { c.analysis.ns = v.integers; }}},
      {"analysis.ms", {Kind::integers, [](C& c, const V& v) { c.analysis.ms = v.integers; }}},
      {"analysis.levels", {Kind::reals, [](C& c, const V& v) { c.analysis.levels = v.reals; }}},
      {"analysis.nodes", {Kind::reals, [](C& c, const V& v) { c.analysis.nodes = v.reals; }}},
      {"analysis.s", {Kind::real, [](C& c, const V& v) { c.analysis.s = v.real; }}},
      {"analysis.t", {Kind::real, [](C& c, const V& v) { c.analysis.t = v.real; }}},
      {"analysis.phi", {Kind::text, [](C& c, const V& v) { c.analysis.phi = v.text; }}},
      {"analysis.g", {Kind::text, [](C& c, const V& v) { c.analysis.g = v.text; }}},
      {"analysis.f", {Kind::text, [](C& c, const V& v) { c.analysis.f = v.text; }}},
      {"analysis.t0", {Kind::real, [](C& c, const V& v) { c.analysis.t0 = v.real; }}},
      {"analysis.t1", {Kind::real, [](C& c, const V& v) { c.analysis.t1 = v.real; }}},
      {"analysis.refine", {Kind::flag, [](C& c, const V& v) { c.analysis.refine = v.flag; }}},
      {"analysis.oracle", {Kind::flag, [](C& c, const V& v) { c.analysis.oracle = v.flag; }}},
      {"analysis.mode", {Kind::text, [](C& c, const V& v) { c.analysis.mode = v.text; }}},
      {"analysis.weight", {Kind::text, [](C& c, const V& v) { c.analysis.weight = v.text; }}},
      {"analysis.cutoff_r", {Kind::real, [](C& c, const V& v) { c.analysis.cutoff_r = v.real; }}},
      {"analysis.cutoff_R", {Kind::real, [](C& c, const V& v) { c.analysis.cutoff_R = v.real; }}},
      {"dgiter.N", {Kind::real, [](C& c, const V& v) { c.dg.N = v.real; }}},
      {"dgiter.C0", {Kind::real, [](C& c, const V& v) { c.dg.C0 = v.real; }}},
      {"dgiter.alpha", {Kind::real, [](C& c, const V& v) { c.dg.alpha = v.real; }}},
      {"dgiter.y0", {Kind::real, [](C& c, const V& v) { c.dg.y0 = v.real; }}},
      {"dgiter.max_m", {Kind::count, [](C& c, const V& v) { c.dg.max_m = static_cast<int>(v.integer); }}},
  };
  return fields;
}

bool integral_ratio(double T, double step) {
  if (!(step > 0.0) || !(T > 0.0)) return false;
  const double n = T / step;
  return std::abs(n - std::round(n)) <= 1e-9 * std::max(1.0, n);
}

bool needs_exponent(Experiment e) {
  return e == Experiment::energy || e == Experiment::supbound || e == Experiment::krylov;
}

void cross_checks(const ExperimentConfig& c, std::vector<ConfigError>& errors) {
  auto err = [&](const std::string& m) { errors.push_back({0, m}); };
  const auto& a = c.analysis;
  const int d = c.drift.d;

  if (c.drift.id.empty()) {
    static const std::set<std::string> kinds{"inverse-square", "bounded-smooth", "lps-power", "zero"};
    if (!kinds.count(c.drift.kind)) err("drift.kind '" + c.drift.kind + "' is not one of inverse-square, bounded-smooth, lps-power, zero");
  }
  try {
    (void)build_drift(c.drift, c.drift.delta, 0);
  } catch (const Error& e) {
    err(std::string("drift: ") + e.what());
  }

  if (needs_exponent(c.experiment)) {
    std::vector<double> deltas = a.deltas;
    const bool inverse = c.drift.id.empty() ? c.drift.kind == "inverse-square" : c.drift.id.find("inverse-square") != std::string::npos;
    if (deltas.empty() && inverse) deltas.push_back(c.drift.delta);
    if (a.p < 2.0) err("analysis.p=" + fmt(a.p) + " must be >= 2");
    if (inverse)
      for (double delta : deltas) {
        if (delta >= 4.0) {
          err("analysis.p=" + fmt(a.p) + " has no admissible range: drift.delta=" + fmt(delta) + " >= 4");
          continue;
        }
        const double pc = drift::p_critical(delta);
        if (!(a.p > pc))
          err("analysis.p=" + fmt(a.p) + " must exceed p_critical(" + (a.deltas.empty() ? "drift.delta" : "analysis.deltas") +
              "=" + fmt(delta) + ") = " + fmt(pc));
      }
  }
  if (c.experiment == Experiment::supbound || c.experiment == Experiment::krylov) {
    if (d < 2 || !(a.theta > 1.0 && a.theta < d / (d - 1.0)))
      err("analysis.theta=" + fmt(a.theta) + " must lie in (1, d/(d-1)) for drift.d=" + std::to_string(d));
  }
  if (c.experiment == Experiment::solve || c.experiment == Experiment::energy || c.experiment == Experiment::supbound) {
    if (!integral_ratio(c.grid.T, c.grid.tau)) err("grid.T / grid.tau must be a positive integer");
    if (!(c.grid.h > 0.0) || !(c.grid.L > 0.0)) err("grid.h and grid.L must be positive");
  }
  const bool mc = c.experiment == Experiment::hitting_scan || c.experiment == Experiment::martingale ||
                  c.experiment == Experiment::krylov || c.experiment == Experiment::scaling;
  if (mc) {
    if (c.mc.M == 0) err("mc.M must be positive");
    if (!integral_ratio(c.mc.T, c.mc.dt)) err("mc.T / mc.dt must be a positive integer");
    if (static_cast<int>(c.mc.x0.size()) != d)
      err("mc.x0 has " + std::to_string(c.mc.x0.size()) + " entries but drift.d=" + std::to_string(d));
  }
  if (c.experiment == Experiment::krylov || c.experiment == Experiment::scaling) {
    if (a.windows.empty()) err("analysis.windows is empty");
    for (const auto& w : a.windows)
      if (!(w.t0 >= 0.0 && w.t0 < w.t1 && w.t1 <= c.mc.T + 1e-12))
        err("analysis.windows entry " + fmt(w.t0) + ":" + fmt(w.t1) + " must satisfy 0 <= t0 < t1 <= mc.T=" + fmt(c.mc.T));
  }
  if (c.experiment == Experiment::scaling) {
    std::set<double> lengths;
    for (const auto& w : a.windows) lengths.insert(w.t1 - w.t0);
    if (lengths.size() < 4) err("analysis.windows needs at least 4 distinct lengths for a scaling fit");
  }
  if (c.experiment == Experiment::martingale) {
    if (!(a.t0 >= 0.0 && a.t0 < a.t1)) err("analysis.t0=" + fmt(a.t0) + " must be below analysis.t1=" + fmt(a.t1));
    if (a.t1 > c.mc.T + 1e-12) err("analysis.t1=" + fmt(a.t1) + " exceeds mc.T=" + fmt(c.mc.T));
    try {
      (void)sde::g_from_string(a.g);
    } catch (const Error& e) {
      err(std::string("analysis.g: ") + e.what());
    }
  }
  if (c.experiment == Experiment::hitting_scan && !(a.epsilon > 0.0)) err("analysis.epsilon must be positive");
  if (c.experiment == Experiment::supbound && a.mode != "local" && a.mode != "global")
    err("analysis.mode must be local or global");
  if (c.experiment == Experiment::energy && a.weight != "cutoff" && a.weight != "rho")
    err("analysis.weight must be cutoff or rho");
  if (c.experiment == Experiment::energy && !(a.cutoff_r > 0.0 && a.cutoff_r < a.cutoff_R))
    err("analysis.cutoff_r must lie in (0, analysis.cutoff_R)");
  if (c.experiment == Experiment::dgiter) {
    if (!(c.dg.N > 0.0) || !(c.dg.C0 > 1.0) || !(c.dg.alpha > 0.0))
      err("dgiter needs N > 0, C0 > 1 and alpha > 0");
  }
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [k, name] : experiment_names())
    if (k == e) return name;
  return "?";
}

std::optional<Experiment> experiment_from_string(const std::string& s) {
  for (const auto& [k, name] : experiment_names())
    if (name == s) return k;
  return std::nullopt;
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> all = [] {
    std::vector<Experiment> v;
    for (const auto& [k, name] : experiment_names()) v.push_back(k);
    return v;
  }();
  return all;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string ExperimentConfig::hash() const {
  std::string canon;
  for (const auto& [k, v] : entries) {
    if (k == "run.output" || k == "run.jobs") continue;
    canon += k + "=" + v + "\n";
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
  return buf;
}

std::string ParseResult::describe() const {
  std::ostringstream os;
  for (const auto& e : errors) {
    if (e.line > 0)
      os << "line " << e.line << ": ";
    else
      os << "config: ";
    os << e.message << "\n";
  }
  return os.str();
}

ParseResult parse_config(const std::string& text, const std::vector<std::pair<std::string, std::string>>& overrides) {
  ParseResult result;
  ExperimentConfig cfg;
  std::map<std::string, int> seen;
  bool experiment_set = false;
  static const std::set<std::string> sections{"run", "drift", "grid", "mc", "analysis", "dgiter"};

  auto assign = [&](const std::string& full, const std::string& raw, int line) {
    const auto it = schema().find(full);
    if (it == schema().end()) {
      result.errors.push_back({line, "unknown key '" + full + "'"});
      return;
    }
    try {
      const Value v = parse_value(it->second.kind, raw);
      it->second.set(cfg, v);
      cfg.entries[full] = canonical(it->second.kind, v);
      if (full == "run.experiment") experiment_set = true;
    } catch (const Error& e) {
      result.errors.push_back({line, "'" + full + "' expects a " + kind_name(it->second.kind) + ": " + e.what()});
    }
  };

  std::istringstream in(text);
  std::string raw_line;
  std::string section;
  int line_no = 0;
  bool section_ok = false;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string line = raw_line;
    for (char mark : {'#', ';'}) {
      const auto pos = line.find(mark);
      if (pos != std::string::npos) line = line.substr(0, pos);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        result.errors.push_back({line_no, "malformed section header '" + line + "'"});
        section_ok = false;
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      section_ok = sections.count(section) > 0;
      if (!section_ok) result.errors.push_back({line_no, "unknown section [" + section + "]"});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      result.errors.push_back({line_no, "expected 'key = value', got '" + line + "'"});
      continue;
    }
    if (section.empty()) {
      result.errors.push_back({line_no, "key outside of any section"});
      continue;
    }
    if (!section_ok) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string full = section + "." + key;
    const auto prev = seen.find(full);
    if (prev != seen.end()) {
      result.errors.push_back({line_no, "duplicate key '" + full + "' (lines " + std::to_string(prev->second) + " and " +
                                            std::to_string(line_no) + ")"});
      continue;
    }
    seen[full] = line_no;
    assign(full, line.substr(eq + 1), line_no);
  }
  for (const auto& [full, value] : overrides) assign(full, value, 0);

  if (!experiment_set) result.errors.push_back({0, "run.experiment is not set"});
  if (result.errors.empty()) cross_checks(cfg, result.errors);
  if (result.errors.empty()) result.config = std::move(cfg);
  return result;
}

drift::DriftPtr build_drift(const DriftSpec& spec) { return build_drift(spec, spec.delta, spec.n); }

drift::DriftPtr build_drift(const DriftSpec& spec, double delta, int n) {
  drift::DriftPtr b;
  if (!spec.id.empty()) {
    b = drift::make_from_id(spec.id);
  } else if (spec.kind == "inverse-square") {
    b = drift::make_inverse_square(spec.d, delta);
  } else if (spec.kind == "bounded-smooth") {
    std::vector<double> v = spec.v;
    if (v.empty()) {
      v.assign(static_cast<std::size_t>(std::max(spec.d, 1)), 0.0);
      v[0] = spec.amp;
    }
    b = drift::make_bounded_smooth(spec.d, v, spec.width);
  } else if (spec.kind == "lps-power") {
    b = drift::make_lps_power(spec.d, spec.a, spec.amp);
  } else if (spec.kind == "zero") {
    b = drift::make_zero(spec.d);
  } else {
    fail(ErrorCode::config_error, "unknown drift kind '" + spec.kind + "'");
  }
  if (n > 0) b = drift::mollify(b, drift::MollificationSchedule::standard(n));
  return b;
}

}  // namespace sslab::runner
