/**
 * @file suite.hpp
 * @brief The canned acceptance experiments, one CSV per criterion.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sslab::runner {

/// `quick` shrinks every ensemble and grid; verdicts are only meaningful for `full`.
enum class Profile { full, quick };

std::string to_string(Profile p);

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  std::string csv;  // file name inside the output directory, empty when none
};

struct SuiteOptions {
  std::string out_dir = "suite-out";
  Profile profile = Profile::full;
  int jobs = 0;
  std::uint64_t seed = 20240601;
  std::vector<int> only;  // empty runs criteria 1-8
  std::function<void(const CriterionResult&)> on_result;
};

/// Runs criteria 1-8 and writes `criterion<N>.csv` files into `out_dir`.
std::vector<CriterionResult> run_suite(const SuiteOptions& options);

/// Criterion 9: runs the suite twice into `<out_dir>/run1` and `<out_dir>/run2`
/// (the second with a different worker count) and compares every CSV body byte for byte.
CriterionResult check_reproducible(const SuiteOptions& options);

/// Criterion 9 against an existing run: reruns the criteria found in `reference_dir`
/// into `<out_dir>` with a different worker count and compares the CSV bodies.
CriterionResult check_reproducible(const SuiteOptions& options, const std::string& reference_dir);

std::string format_result(const CriterionResult& r);

}  // namespace sslab::runner
