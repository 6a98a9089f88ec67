// Acceptance run: every criterion at full scale, one PASS/FAIL line each.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "sslab/runner/suite.hpp"

using namespace sslab::runner;

int main(int argc, char** argv) {
  SuiteOptions opt;
  opt.out_dir = argc > 1 ? argv[1] : "acceptance-out";
  opt.profile = Profile::full;
  if (const char* j = std::getenv("SSL_LAB_JOBS")) opt.jobs = std::atoi(j);
  int failed = 0;
  std::filesystem::create_directories(opt.out_dir);
  std::ofstream summary(opt.out_dir + "/summary.txt");
  opt.on_result = [&](const CriterionResult& r) {
    std::cout << format_result(r) << std::endl;
    summary << format_result(r) << std::endl;
    if (!r.pass) ++failed;
  };
  run_suite(opt);

  SuiteOptions rep = opt;
  rep.out_dir = opt.out_dir + "/repeat";
  check_reproducible(rep, opt.out_dir);

  std::cout << (failed == 0 ? "ALL CRITERIA PASS" : std::to_string(failed) + " CRITERIA FAIL") << std::endl;
  return failed == 0 ? 0 : 1;
}
