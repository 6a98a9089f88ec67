#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sslab/runner/config.hpp"
#include "sslab/runner/run.hpp"
#include "sslab/runner/suite.hpp"

using namespace sslab::runner;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("sslab_runner_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool mentions(const ParseResult& r, const std::string& a, const std::string& b = "") {
  for (const auto& e : r.errors)
    if (e.message.find(a) != std::string::npos && (b.empty() || e.message.find(b) != std::string::npos)) return true;
  return false;
}

ExperimentConfig must_parse(const std::string& text, const std::vector<std::pair<std::string, std::string>>& o = {}) {
  auto r = parse_config(text, o);
  EXPECT_TRUE(r.ok()) << r.describe();
  return r.ok() ? *r.config : ExperimentConfig{};
}

}  // namespace

TEST(Config, MinimalHittingScan) {
  const auto c = must_parse(R"(
# critical threshold scan
[run]
experiment = hitting-scan
[drift]
kind = inverse-square
d = 3
delta = 9
[mc]
M = 100000
)");
  EXPECT_EQ(c.experiment, Experiment::hitting_scan);
  EXPECT_EQ(c.drift.d, 3);
  EXPECT_DOUBLE_EQ(c.drift.delta, 9.0);
  EXPECT_EQ(c.mc.M, 100000u);
}

TEST(Config, ExponentBelowCriticalNamesBothKeys) {
  const auto r = parse_config("[run]\nexperiment = energy\n[drift]\ndelta = 1\n[analysis]\np = 1.5\n");
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "analysis.p", "drift.delta")) << r.describe();
}

TEST(Config, ExponentGateAtCriticalValue) {
  EXPECT_FALSE(parse_config("[run]\nexperiment = energy\n[drift]\ndelta = 1\n[analysis]\np = 2\n").ok());
  EXPECT_TRUE(parse_config("[run]\nexperiment = energy\n[drift]\ndelta = 1\n[analysis]\np = 2.05\n").ok());
}

TEST(Config, DuplicateKeyReportsBothLines) {
  const auto r = parse_config("[run]\nexperiment = certify\n[drift]\ndelta = 1\nd = 3\ndelta = 2\n");
  ASSERT_FALSE(r.ok());
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 6);
  EXPECT_TRUE(mentions(r, "lines 4 and 6")) << r.describe();
}

TEST(Config, CollectsEveryError) {
  const auto r = parse_config("[run]\nexperiment = certify\ncolour = red\n[drift]\nd = three\n[nowhere]\nnot a pair\n");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.errors.size(), 4u) << r.describe();
  EXPECT_TRUE(mentions(r, "unknown key 'run.colour'"));
  EXPECT_TRUE(mentions(r, "drift.d"));
  EXPECT_TRUE(mentions(r, "unknown section"));
  EXPECT_EQ(r.errors[0].line, 3);
  EXPECT_EQ(r.errors[1].line, 5);
}

TEST(Config, MissingExperiment) {
  const auto r = parse_config("[drift]\ndelta = 1\n");
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(mentions(r, "run.experiment"));
}

TEST(Config, CrossFieldChecks) {
  EXPECT_TRUE(mentions(parse_config("[run]\nexperiment = supbound\n[analysis]\np = 4\ntheta = 1.6\n"), "analysis.theta"));
  EXPECT_TRUE(mentions(parse_config("[run]\nexperiment = hitting-scan\n[mc]\nT = 1\ndt = 0.3\n"), "mc.T / mc.dt"));
  EXPECT_TRUE(mentions(parse_config("[run]\nexperiment = hitting-scan\n[mc]\nx0 = 0.5, 0\n"), "mc.x0"));
  EXPECT_TRUE(mentions(parse_config("[run]\nexperiment = martingale\n[analysis]\nt0 = 0.5\nt1 = 0.25\n"), "analysis.t0"));
  EXPECT_TRUE(mentions(parse_config("[run]\nexperiment = scaling\n[analysis]\nwindows = 0:0.1, 0:0.2\n"), "4 distinct"));
  EXPECT_TRUE(mentions(parse_config("[run]\nexperiment = krylov\n[mc]\nT = 0.5\n"), "analysis.windows"));
}

TEST(Config, OverridesWinOverFile) {
  const auto c = must_parse("[run]\nexperiment = hitting-scan\n[mc]\nM = 500\n", {{"mc.M", "700"}, {"analysis.deltas", "1,9"}});
  EXPECT_EQ(c.mc.M, 700u);
  ASSERT_EQ(c.analysis.deltas.size(), 2u);
  EXPECT_DOUBLE_EQ(c.analysis.deltas[1], 9.0);
  const auto bad = parse_config("[run]\nexperiment = hitting-scan\n", {{"mc.bogus", "1"}});
  ASSERT_FALSE(bad.ok());
  EXPECT_EQ(bad.errors[0].line, 0);
}

TEST(Config, HashIgnoresOutputJobsAndLayout) {
  const auto a = must_parse("[run]\nexperiment = dgiter\n[dgiter]\nN = 1\nC0 = 2\n");
  const auto b = must_parse("# comment\n[dgiter]\nC0 = 2.0\nN = 1\n[run]\nexperiment = dgiter\noutput = x.csv\njobs = 4\n");
  const auto c = must_parse("[run]\nexperiment = dgiter\n[dgiter]\nN = 1\nC0 = 3\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Run, DgiterConvergesAtThreshold) {
  const auto c = must_parse("", {{"run.experiment", "dgiter"}, {"dgiter.N", "1"}, {"dgiter.C0", "2"},
                                 {"dgiter.alpha", "1"}, {"dgiter.y0", "0.5"}});
  const auto r = run(c);
  EXPECT_TRUE(r.clean());
  EXPECT_EQ(r.csv.substr(0, 10), "m,y\n0,0.5\n");
  ASSERT_FALSE(r.summary.empty());
  EXPECT_NE(r.summary[0].find("converged=true"), std::string::npos);
}

TEST(Run, CertifyNearDelta) {
  const auto c = must_parse("", {{"run.experiment", "certify"}, {"drift.id", "inverse-square:d=3:delta=1"},
                                 {"analysis.nodes", "8,16"}});
  const auto r = run(c);
  std::istringstream in(r.csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_NE(header.find("delta"), std::string::npos);
  EXPECT_NE(row.find(",0.99"), std::string::npos) << row;
}

TEST(Run, HittingScanMonotone) {
  const auto c = must_parse("", {{"run.experiment", "hitting-scan"}, {"analysis.deltas", "0.25,1,4,9,16"},
                                 {"mc.M", "1000"}, {"mc.dt", "0.001"}});
  const auto r = run(c);
  EXPECT_TRUE(r.clean());
  EXPECT_NE(r.summary.back().find("nondecreasing"), std::string::npos) << r.csv;
}

TEST(Run, EveryExperimentProducesCsv) {
  const std::vector<std::vector<std::pair<std::string, std::string>>> small{
      {{"run.experiment", "solve"}, {"grid.h", "0.25"}, {"grid.tau", "0.05"}, {"drift.n", "4"}},
      {{"run.experiment", "energy"}, {"grid.h", "0.25"}, {"grid.tau", "0.05"}, {"drift.n", "4"}},
      {{"run.experiment", "supbound"}, {"grid.h", "0.25"}, {"grid.tau", "0.05"}, {"drift.n", "4"}, {"analysis.p", "4"}},
      {{"run.experiment", "martingale"}, {"mc.M", "500"}, {"mc.T", "0.5"}, {"analysis.ns", "4,8"}},
      {{"run.experiment", "krylov"}, {"mc.M", "500"}, {"drift.n", "8"}, {"analysis.ms", "4,8"}},
      {{"run.experiment", "scaling"}, {"mc.M", "500"}, {"drift.n", "8"}, {"mc.T", "0.8"},
       {"analysis.windows", "0:0.1,0:0.2,0:0.4,0:0.8"}},
  };
  const auto dir = scratch("each");
  for (const auto& o : small) {
    auto with_out = o;
    with_out.emplace_back("run.output", (dir / (o[0].second + ".csv")).string());
    const auto c = must_parse("", with_out);
    const auto r = run(c);
    const auto text = slurp(c.output);
    EXPECT_EQ(text.rfind(manifest_line(c.hash()), 0), 0u) << o[0].second;
    EXPECT_GT(csv_body(text).size(), 10u) << o[0].second;
    EXPECT_TRUE(fs::exists(c.output + ".manifest.json")) << o[0].second;
    EXPECT_FALSE(fs::exists(c.output + ".tmp")) << o[0].second;
  }
}

TEST(Run, EnergyExplainHasBreakdown) {
  const auto c = must_parse("", {{"run.experiment", "energy"}, {"grid.h", "0.25"}, {"grid.tau", "0.05"}, {"drift.n", "4"},
                                 {"analysis.levels", "0"}});
  const auto r = run(c);
  ASSERT_EQ(r.explain.size(), 1u);
  EXPECT_GT(r.explain[0].size(), 40u);
}

TEST(Run, RerunIsByteIdentical) {
  const auto dir = scratch("rerun");
  std::vector<std::pair<std::string, std::string>> o{{"run.experiment", "hitting-scan"}, {"analysis.deltas", "1,9"},
                                                     {"mc.M", "700"}, {"analysis.oracle", "true"}};
  auto a = o, b = o;
  a.emplace_back("run.output", (dir / "a.csv").string());
  a.emplace_back("run.jobs", "1");
  b.emplace_back("run.output", (dir / "b.csv").string());
  b.emplace_back("run.jobs", "3");
  const auto ca = must_parse("", a), cb = must_parse("", b);
  EXPECT_EQ(ca.hash(), cb.hash());
  run(ca);
  run(cb);
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
}

TEST(Run, CsvBodyStripsComments) {
  EXPECT_EQ(csv_body("# manifest=1 version=2\na,b\n1,2\n"), "a,b\n1,2\n");
}

TEST(Suite, QuickProfileSubset) {
  SuiteOptions opt;
  opt.out_dir = scratch("suite").string();
  opt.profile = Profile::quick;
  opt.only = {1, 2, 3};
  const auto res = run_suite(opt);
  ASSERT_EQ(res.size(), 3u);
  for (const auto& r : res) {
    EXPECT_TRUE(r.pass) << format_result(r);
    const auto text = slurp(fs::path(opt.out_dir) / r.csv);
    EXPECT_EQ(text.rfind("# manifest=", 0), 0u);
  }
}

TEST(Suite, ReproducibleAcrossJobCounts) {
  SuiteOptions opt;
  opt.out_dir = scratch("repro").string();
  opt.profile = Profile::quick;
  opt.jobs = 3;
  opt.only = {2, 6};
  const auto r = check_reproducible(opt);
  EXPECT_TRUE(r.pass) << format_result(r);
}
