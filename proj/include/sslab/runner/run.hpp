#pragma once

#include <string>
#include <vector>

#include "sslab/runner/config.hpp"

namespace sslab::runner {

std::string version();

/// `# manifest=<hash> version=<semver>`
std::string manifest_line(const std::string& hash);

struct Stage {
  std::string name;
  double seconds = 0.0;
};

struct RunManifest {
  std::string hash;
  std::string version;
  std::string experiment;
  double wall_seconds = 0.0;
  std::vector<Stage> stages;
  std::vector<std::string> warnings;
  std::vector<std::string> outputs;
  std::map<std::string, std::string> config;

  std::string to_json() const;
};

struct RunResult {
  RunManifest manifest;
  /// Header line plus rows, without the manifest comment.
  std::string csv;
  std::vector<std::string> summary;
  /// Term-by-term breakdowns, printed by the CLI in --explain mode.
  std::vector<std::string> explain;
  bool clean() const { return manifest.warnings.empty(); }
};

/// Runs the experiment; when `output` is set, writes the CSV (the solution for `solve`)
/// and `<output>.manifest.json`, both atomically.
RunResult run(const ExperimentConfig& config);

/// Writes the manifest comment followed by `body`.
void write_csv_file(const std::string& path, const std::string& hash, const std::string& body);

/// Everything after the first line that starts with '#'.
std::string csv_body(const std::string& file_text);

}  // namespace sslab::runner
