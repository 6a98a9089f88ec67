/**
 * @file config.hpp
 * @brief INI-style experiment configuration.
 *
 * Sections [run], [drift], [grid], [mc], [analysis], [dgiter]; `key = value` lines;
 * `#` or `;` comments. Parsing collects every error instead of stopping at the first.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sslab/drift/drift_field.hpp"
#include "sslab/sde/krylov.hpp"

namespace sslab::runner {

enum class Experiment { certify, solve, energy, supbound, dgiter, hitting_scan, martingale, krylov, scaling };

std::string to_string(Experiment e);
std::optional<Experiment> experiment_from_string(const std::string& s);
const std::vector<Experiment>& all_experiments();

struct DriftSpec {
  std::string id;  // full catalog id; overrides kind and parameters when set
  std::string kind = "inverse-square";
  int d = 3;
  double delta = 1.0;
  double amp = 1.0;
  double a = 0.5;
  double width = INFINITY;
  std::vector<double> v;
  int n = 0;  // mollification level, 0 keeps the raw field
};

struct GridSpec {
  double h = 0.1;
  double tau = 0.01;
  double T = 0.25;
  double L = 2.0;
};

struct McSpec {
  std::size_t M = 10000;
  double dt = 1e-3;
  double T = 1.0;
  std::vector<double> x0{0.5, 0.0, 0.0};
  double cap = 10.0;
};

struct AnalysisSpec {
  double p = 2.5;
  double theta = 1.25;
  double kappa = 0.01;
  std::optional<double> beta;  // default d/4 + 1/4
  std::vector<sde::TimeWindow> windows{{0.0, 0.25}, {0.0, 0.5}, {0.25, 0.75}};
  double epsilon = 0.05;
  std::vector<double> deltas;
  std::vector<int> ns;
  std::vector<int> ms;
  std::vector<double> levels{0.0, 0.25, 0.5};  // fractions of max u
  std::vector<double> nodes{8.0, 16.0, 32.0};  // certificate refinement
  double s = 0.0;
  std::optional<double> t;                     // energy window end, default grid T
  std::string phi = "bump:amp=1:radius=1";
  std::string g = "one";
  std::string f;                               // scalar id for the Krylov f, empty means 1
  double t0 = 0.25, t1 = 0.5;
  bool refine = false;
  bool oracle = false;
  std::string mode = "local";
  std::string weight = "cutoff";
  double cutoff_r = 0.5, cutoff_R = 1.0;
};

struct DgSpec {
  double N = 1.0, C0 = 2.0, alpha = 1.0;
  std::optional<double> y0;  // default: threshold
  int max_m = 200;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::certify;
  std::string output;
  std::uint64_t seed = 1;
  int jobs = 0;
  DriftSpec drift;
  GridSpec grid;
  McSpec mc;
  AnalysisSpec analysis;
  DgSpec dg;
  /// Normalized "section.key=value" entries that were set, used for hashing.
  std::map<std::string, std::string> entries;

  /// FNV-1a over the normalized entries, excluding run.output and run.jobs.
  std::string hash() const;
};

struct ConfigError {
  int line = 0;  // 0 for command-line overrides and cross-field checks
  std::string message;
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigError> errors;
  bool ok() const { return config.has_value(); }
  std::string describe() const;
};

/// `overrides` are ("section.key", value) pairs applied after the file, as if on later lines.
ParseResult parse_config(const std::string& text, const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Drift described by the spec with its own delta and n replaced.
drift::DriftPtr build_drift(const DriftSpec& spec);
drift::DriftPtr build_drift(const DriftSpec& spec, double delta, int n);

std::uint64_t fnv1a(const std::string& s);

}  // namespace sslab::runner
