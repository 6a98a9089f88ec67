#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sslab/core/error.hpp"
#include "sslab/runner/config.hpp"
#include "sslab/runner/run.hpp"
#include "sslab/runner/suite.hpp"

namespace {

using namespace sslab::runner;

struct FlagMap {
  const char* flag;
  const char* key;
  const char* help;
};

// Shorthand flags; everything else is reachable through --set section.key=value.
const std::vector<FlagMap> kFlags{
    {"--drift", "drift.id", "drift catalog id, e.g. inverse-square:d=3:delta=1"},
    {"--kind", "drift.kind", "drift kind: inverse-square, bounded-smooth, lps-power, zero"},
    {"--d", "drift.d", "dimension"},
    {"--delta", "drift.delta", "form-bound parameter"},
    {"--n", "drift.n", "mollification level (0 = raw field)"},
    {"--grid-h", "grid.h", "grid spacing"},
    {"--grid-tau", "grid.tau", "time step of the PDE solver"},
    {"--grid-T", "grid.T", "PDE horizon"},
    {"--grid-L", "grid.L", "box half-width"},
    {"--M", "mc.M", "number of paths"},
    {"--dt", "mc.dt", "Euler step"},
    {"--T", "mc.T", "simulation horizon"},
    {"--x0", "mc.x0", "start point, comma separated"},
    {"--p", "analysis.p", "integrability exponent"},
    {"--theta", "analysis.theta", "theta in (1, d/(d-1))"},
    {"--deltas", "analysis.deltas", "delta scan, comma separated"},
    {"--ns", "analysis.ns", "mollification scan, comma separated"},
    {"--ms", "analysis.ms", "difference levels for krylov, comma separated"},
    {"--windows", "analysis.windows", "time windows t0:t1, comma separated"},
    {"--epsilon", "analysis.epsilon", "hitting radius"},
    {"--g", "analysis.g", "martingale functional: one, clip-phi, clip-mean"},
    {"--N", "dgiter.N", "recurrence factor N"},
    {"--C0", "dgiter.C0", "recurrence base C0"},
    {"--alpha", "dgiter.alpha", "recurrence exponent alpha"},
    {"--y0", "dgiter.y0", "initial value (default: threshold)"},
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int env_jobs() {
  const char* v = std::getenv("SSL_LAB_JOBS");
  if (!v || !*v) return 0;
  try {
    return std::max(0, std::stoi(v));
  } catch (...) {
    std::cerr << "ignoring SSL_LAB_JOBS=" << v << "\n";
    return 0;
  }
}

struct ExperimentArgs {
  std::string config_path;
  std::string output;
  int jobs = -1;
  long long seed = -1;
  bool explain = false;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;
};

void add_experiment(CLI::App& app, Experiment e, ExperimentArgs& args, std::string& chosen) {
  auto* sub = app.add_subcommand(to_string(e), "run the " + to_string(e) + " experiment");
  sub->add_option("-c,--config", args.config_path, "INI config file");
  sub->add_option("-o,--output", args.output, "CSV output path");
  sub->add_option("-j,--jobs", args.jobs, "worker threads (fallback: SSL_LAB_JOBS)");
  sub->add_option("--seed", args.seed, "random seed");
  sub->add_flag("--explain", args.explain, "print the term-by-term breakdown");
  sub->add_option("--set", args.sets, "override section.key=value")->take_all();
  for (const auto& f : kFlags) sub->add_option(f.flag, args.flags[f.key], f.help);
  sub->callback([&chosen, name = to_string(e)] { chosen = name; });
}

int run_experiment(const std::string& name, const ExperimentArgs& args) {
  const std::string text = args.config_path.empty() ? std::string() : read_text(args.config_path);
  std::vector<std::pair<std::string, std::string>> overrides{{"run.experiment", name}};
  for (const auto& [key, value] : args.flags)
    if (!value.empty()) overrides.emplace_back(key, value);
  for (const auto& s : args.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      std::cerr << "--set expects section.key=value, got '" << s << "'\n";
      return 2;
    }
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!args.output.empty()) overrides.emplace_back("run.output", args.output);
  if (args.seed >= 0) overrides.emplace_back("run.seed", std::to_string(args.seed));
  const int jobs = args.jobs >= 0 ? args.jobs : env_jobs();
  if (jobs > 0) overrides.emplace_back("run.jobs", std::to_string(jobs));

  const auto parsed = parse_config(text, overrides);
  if (!parsed.ok()) {
    std::cerr << parsed.describe();
    return 2;
  }
  const auto result = run(*parsed.config);
  if (parsed.config->output.empty() && parsed.config->experiment != Experiment::solve)
    std::cout << manifest_line(result.manifest.hash) << "\n" << result.csv;
  for (const auto& s : result.summary) std::cerr << s << "\n";
  if (args.explain)
    for (const auto& e : result.explain) std::cerr << e << "\n";
  for (const auto& w : result.manifest.warnings) std::cerr << "warning: " << w << "\n";
  return result.clean() ? 0 : 1;
}

struct SuiteArgs {
  std::string out = "suite-out";
  std::string profile = "full";
  std::vector<int> only;
  int jobs = -1;
  long long seed = -1;
};

int run_suite_cmd(const SuiteArgs& args) {
  SuiteOptions opt;
  opt.out_dir = args.out;
  opt.profile = args.profile == "quick" ? Profile::quick : Profile::full;
  opt.jobs = args.jobs >= 0 ? args.jobs : env_jobs();
  if (args.seed >= 0) opt.seed = static_cast<std::uint64_t>(args.seed);
  opt.on_result = [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; };
  bool ok = true;
  std::vector<int> main_ids;
  for (int id : args.only)
    if (id != 9) main_ids.push_back(id);
  const bool want9 = args.only.empty() || main_ids.size() != args.only.size();
  const bool want_main = args.only.empty() || !main_ids.empty();
  if (want_main) {
    opt.only = main_ids;
    for (const auto& r : run_suite(opt)) ok = ok && r.pass;
  }
  if (want9) {
    SuiteOptions rep = opt;
    rep.out_dir = opt.out_dir + "/repeat";
    const auto r = want_main ? check_reproducible(rep, opt.out_dir) : check_reproducible(rep);
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for diffusions with singular drift"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  ExperimentArgs exp_args;
  std::string chosen;
  for (auto e : all_experiments()) add_experiment(app, e, exp_args, chosen);

  SuiteArgs suite_args;
  auto* suite = app.add_subcommand("suite", "run every acceptance check");
  suite->add_option("--out", suite_args.out, "output directory");
  suite->add_option("--profile", suite_args.profile, "full or quick")->check(CLI::IsMember({"full", "quick"}));
  suite->add_option("--only", suite_args.only, "criteria to run (1-9)")->delimiter(',')->check(CLI::Range(1, 9));
  suite->add_option("-j,--jobs", suite_args.jobs, "worker threads (fallback: SSL_LAB_JOBS)");
  suite->add_option("--seed", suite_args.seed, "base seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (suite->parsed()) return run_suite_cmd(suite_args);
    return run_experiment(chosen, exp_args);
  } catch (const sslab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
