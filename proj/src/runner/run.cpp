#include "sslab/runner/run.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sslab/core/io.hpp"
#include "sslab/drift/certificate.hpp"
#include "sslab/drift/mollify.hpp"
#include "sslab/energy/dg_iterate.hpp"
#include "sslab/energy/energy_report.hpp"
#include "sslab/energy/sup_bound.hpp"
#include "sslab/pde/solution_io.hpp"
#include "sslab/pde/solver.hpp"
#include "sslab/sde/hitting.hpp"
#include "sslab/sde/krylov.hpp"
#include "sslab/sde/martingale.hpp"

namespace sslab::runner {

namespace {

using Clock = std::chrono::steady_clock;

class Recorder {
 public:
  explicit Recorder(RunManifest& m) : m_(m) {}
  template <class F>
  auto stage(const std::string& name, F&& f) {
    const auto t0 = Clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      m_.stages.push_back({name, std::chrono::duration<double>(Clock::now() - t0).count()});
    } else {
      auto r = f();
      m_.stages.push_back({name, std::chrono::duration<double>(Clock::now() - t0).count()});
      return r;
    }
  }
  void warn(const std::string& w) { m_.warnings.push_back(w); }

 private:
  RunManifest& m_;
};

struct Table {
  std::string header;
  std::vector<std::string> rows;
  std::string text() const {
    std::string out = header + "\n";
    for (const auto& r : rows) out += r + "\n";
    return out;
  }
};

pde::Grid grid_of(const ExperimentConfig& c) {
  pde::Grid g;
  g.d = c.drift.d;
  g.h = c.grid.h;
  g.tau = c.grid.tau;
  g.T = c.grid.T;
  g.L = c.grid.L;
  return g;
}

sde::EnsembleSpec ensemble_of(const ExperimentConfig& c) {
  sde::EnsembleSpec s;
  s.d = c.drift.d;
  require(static_cast<int>(c.mc.x0.size()) == s.d, ErrorCode::invalid_dimension, "mc.x0 does not match drift.d");
  for (int a = 0; a < s.d; ++a) s.x0[a] = c.mc.x0[static_cast<std::size_t>(a)];
  s.dt = c.mc.dt;
  s.T = c.mc.T;
  s.M = c.mc.M;
  s.seed = c.seed;
  s.jobs = c.jobs;
  s.cap_factor = c.mc.cap;
  return s;
}

energy::Weight weight_of(const ExperimentConfig& c) {
  const double beta = c.analysis.beta.value_or(c.drift.d / 4.0 + 0.25);
  return energy::Weight(c.analysis.kappa, beta);
}

std::vector<double> deltas_of(const ExperimentConfig& c) {
  return c.analysis.deltas.empty() ? std::vector<double>{c.drift.delta} : c.analysis.deltas;
}

std::vector<int> ns_of(const ExperimentConfig& c) {
  return c.analysis.ns.empty() ? std::vector<int>{c.drift.n} : c.analysis.ns;
}

void check_ensemble(Recorder& rec, const sde::PathEnsemble& ens, const std::string& label) {
  if (ens.nonfinite > 0) rec.warn(label + ": " + std::to_string(ens.nonfinite) + " paths became non-finite and were excluded");
  if (ens.cap_fraction() >= 1e-3)
    rec.warn(label + ": displacement cap active on " + fmt(100.0 * ens.cap_fraction()) + "% of steps");
}

sde::PathEnsemble simulate_checked(Recorder& rec, const drift::DriftPtr& b, const sde::EnsembleSpec& spec,
                                   const sde::SimulateOptions& opt, const std::string& label) {
  auto ens = rec.stage("simulate " + label, [&] { return sde::simulate(b, spec, opt); });
  check_ensemble(rec, ens, label);
  return ens;
}

pde::ScalarPtr grad_norm(const pde::ScalarPtr& phi) {
  const int d = phi->d();
  return pde::make_function(
      d,
      [phi, d](double t, const double* x) {
        double g[simd::kMaxPathDim];
        phi->gradient(t, x, g);
        double s = 0.0;
        for (int a = 0; a < d; ++a) s += g[a] * g[a];
        return std::sqrt(s);
      },
      "grad-norm(" + phi->id() + ")", 8.0 * phi->sup_abs());
}

Table run_certify(const ExperimentConfig& c, Recorder& rec, std::vector<std::string>& summary) {
  Table t{drift::certificate_csv_header() + ",levels", {}};
  for (double delta : deltas_of(c)) {
    const auto b = build_drift(c.drift, delta, c.drift.n);
    const auto rc = rec.stage("certify delta=" + fmt(delta), [&] {
      return c.analysis.nodes.size() > 1 ? drift::certify_refined(*b, c.analysis.nodes)
                                         : drift::RefinedCertificate{drift::certify_form_bound(*b, drift::CertGrid{
                                                                         c.analysis.nodes.empty() ? 32.0 : c.analysis.nodes[0]}),
                                                                     {}};
    });
    t.rows.push_back(drift::certificate_csv_row(*b, rc.certificate) + "," + join(rc.level_delta, ';'));
    summary.push_back(b->id() + ": delta ~ " + fmt(rc.certificate.delta));
  }
  return t;
}

Table run_solve(const ExperimentConfig& c, Recorder& rec, std::vector<std::string>& summary, RunManifest& m) {
  const auto g = grid_of(c);
  const auto b = build_drift(c.drift);
  const auto src = energy::standard_source(g.d);
  const auto u = rec.stage("solve", [&] { return pde::solve_cauchy(b, src, g); });
  for (const auto& w : u.warnings()) rec.warn("solve: " + w);
  const double res = rec.stage("residual", [&] { return pde::residual_norm(u, b, src); });
  if (!c.output.empty()) {
    pde::write_csv(u, c.output, manifest_line(m.hash));
    m.outputs.push_back(c.output);
  }
  summary.push_back("max u = " + fmt(u.max_value()) + ", residual = " + fmt(res));
  Table t{"h,tau,T,L,frames,max_u,min_u,residual", {}};
  t.rows.push_back(join(std::vector<double>{g.h, g.tau, g.T, g.L, static_cast<double>(u.frame_count()), u.max_value(),
                                            u.min_value(), res},
                        ','));
  return t;
}

Table run_energy(const ExperimentConfig& c, Recorder& rec, std::vector<std::string>& summary,
                 std::vector<std::string>& explain) {
  const auto g = grid_of(c);
  energy::EnergyInputs in;
  in.b = build_drift(c.drift);
  in.src = energy::standard_source(g.d);
  in.b_bound = energy::known_form_bound(in.b.get());
  in.h_bound = energy::known_form_bound(in.src.h_field.get());
  const auto u = rec.stage("solve", [&] { return pde::solve_cauchy(in.b, in.src, g); });
  for (const auto& w : u.warnings()) rec.warn("solve: " + w);
  const double t_end = c.analysis.t.value_or(g.T);
  const double umax = u.max_value();
  energy::WeightChoice w = energy::CutoffFamily(c.analysis.cutoff_r, c.analysis.cutoff_R);
  if (c.analysis.weight == "rho") w = weight_of(c);
  Table t{"level," + energy::energy_csv_header() + ",identity_residual", {}};
  bool all = true;
  for (double frac : c.analysis.levels) {
    const double level = frac * umax;
    const auto r = rec.stage("report c=" + fmt(frac), [&] {
      return energy::energy_report(u, in, c.analysis.p, c.analysis.s, t_end, level, w);
    });
    const auto id = energy::energy_identity(u, in, c.analysis.p, c.analysis.s, t_end, level, w);
    t.rows.push_back(fmt(frac) + "," + energy::energy_csv_row(r) + "," + fmt(id.residual));
    explain.push_back("level c = " + fmt(frac) + " * max u\n" + r.explain());
    all = all && r.satisfied;
  }
  if (!all) rec.warn("energy inequality violated at some level");
  summary.push_back(std::string("energy inequality ") + (all ? "satisfied" : "VIOLATED") + " at every level");
  return t;
}

Table run_supbound(const ExperimentConfig& c, Recorder& rec, std::vector<std::string>& summary,
                   std::vector<std::string>& explain) {
  const auto g = grid_of(c);
  const auto src = energy::standard_source(g.d);
  const auto mode = c.analysis.mode == "global" ? energy::SupMode::weighted_global : energy::SupMode::local_ball;
  Table t{"delta,n," + energy::sup_csv_header(), {}};
  double lo = INFINITY, hi = 0.0;
  for (double delta : deltas_of(c))
    for (int n : ns_of(c)) {
      const auto b = build_drift(c.drift, delta, n);
      const auto u = rec.stage("solve delta=" + fmt(delta) + " n=" + std::to_string(n),
                               [&] { return pde::solve_cauchy(b, src, g); });
      for (const auto& w : u.warnings()) rec.warn("solve: " + w);
      const auto r = energy::sup_bound_check(u, src, c.analysis.p, c.analysis.theta, mode, weight_of(c));
      t.rows.push_back(fmt(delta) + "," + std::to_string(n) + "," + energy::sup_csv_row(r));
      explain.push_back("delta=" + fmt(delta) + " n=" + std::to_string(n) + " mode=" + energy::to_string(r.mode) +
                        "\n  p=" + fmt(r.p) + " theta=" + fmt(r.theta) + " theta'=" + fmt(r.theta_prime) +
                        "\n  sup u (lhs)    = " + fmt(r.lhs) + "\n  source term    = " + fmt(r.source_term) +
                        "\n  U^(1/p) term   = " + fmt(r.u_term) + "\n  implied K      = " + fmt(r.implied_K) +
                        "\n  implied C      = " + fmt(r.implied_C));
      lo = std::min(lo, r.implied_C);
      hi = std::max(hi, r.implied_C);
    }
  summary.push_back("implied C in [" + fmt(lo) + ", " + fmt(hi) + "], ratio " + fmt(lo > 0.0 ? hi / lo : INFINITY));
  return t;
}

Table run_dgiter(const ExperimentConfig& c, Recorder& rec, std::vector<std::string>& summary) {
  const double y0 = c.dg.y0.value_or(energy::dg_threshold(c.dg.N, c.dg.C0, c.dg.alpha));
  const auto s = rec.stage("iterate", [&] { return energy::dg_iterate(c.dg.N, c.dg.C0, c.dg.alpha, y0, c.dg.max_m); });
  Table t{"m,y", {}};
  for (std::size_t m = 0; m < s.y.size(); ++m) t.rows.push_back(std::to_string(m) + "," + fmt(s.y[m]));
  summary.push_back("threshold = " + fmt(s.threshold) + ", converged=" + (s.converged ? "true" : "false") +
                    ", diverged=" + (s.diverged ? "true" : "false") +
                    (s.blowup_index ? ", exceeds 1 at m=" + std::to_string(*s.blowup_index) : ""));
  return t;
}

Table run_hitting(const ExperimentConfig& c, Recorder& rec, std::vector<std::string>& summary) {
  auto spec = ensemble_of(c);
  sde::SimulateOptions opt;
  opt.stop_radius = c.analysis.epsilon;
  Table t{"engine," + sde::hitting_csv_header(), {}};
  std::vector<double> ps;
  for (double delta : deltas_of(c)) {
    const auto b = build_drift(c.drift, delta, c.drift.n);
    const std::string label = "delta=" + fmt(delta);
    auto h = sde::hitting_probability(simulate_checked(rec, b, spec, opt, label), c.analysis.epsilon);
    if (c.analysis.refine) {
      auto half = spec;
      half.dt = spec.dt / 2.0;
      const auto hh = sde::hitting_probability(simulate_checked(rec, b, half, opt, label + " dt/2"), c.analysis.epsilon);
      h.p_half_dt = hh.p_hat;
      h.ci95_half_dt = hh.ci95;
    }
    t.rows.push_back("full," + sde::hitting_csv_row(delta, h));
    ps.push_back(h.p_hat);
    if (c.analysis.oracle && c.drift.id.empty() && c.drift.kind == "inverse-square" && c.drift.d >= 3) {
      const auto o = rec.stage("oracle " + label, [&] {
        return sde::radial_oracle(c.drift.d, delta, spec.x0_radius(), c.analysis.epsilon, spec.dt, spec.T, spec.M,
                                  spec.seed, spec.jobs);
      });
      t.rows.push_back("radial," + sde::hitting_csv_row(delta, o.stats));
    }
  }
  const bool monotone = std::is_sorted(ps.begin(), ps.end());
  summary.push_back(std::string("p_hat ") + (monotone ? "nondecreasing" : "NOT monotone") + " over the scan");
  return t;
}

Table run_martingale(const ExperimentConfig& c, Recorder& rec, std::vector<std::string>& summary) {
  const auto spec = ensemble_of(c);
  const auto phi = pde::scalar_from_id(c.drift.d, c.analysis.phi);
  const auto g = sde::g_from_string(c.analysis.g);
  Table t{sde::defect_csv_header(), {}};
  for (int n : ns_of(c)) {
    const auto b = build_drift(c.drift, c.drift.delta, n);
    sde::MartingaleObserver obs(phi, c.analysis.t0, c.analysis.t1, g);
    auto run_spec = spec;
    run_spec.T = c.analysis.t1;
    sde::SimulateOptions opt;
    opt.observers.push_back(&obs);
    const auto ens = simulate_checked(rec, b, run_spec, opt, "n=" + std::to_string(n));
    const auto d = obs.result(ens.excluded);
    t.rows.push_back(sde::defect_csv_row(d, n));
    summary.push_back("n=" + std::to_string(n) + ": defect " + fmt(d.defect) + " +- " + fmt(d.stderr_));
  }
  return t;
}

sde::KrylovGrid krylov_grid(const ExperimentConfig& c) {
  sde::KrylovGrid kg;
  kg.L = c.grid.L;
  kg.h = c.grid.h;
  return kg;
}

Table run_krylov(const ExperimentConfig& c, Recorder& rec, std::vector<std::string>& summary) {
  const auto spec = ensemble_of(c);
  const auto b = build_drift(c.drift);
  const auto rho = weight_of(c);
  const auto& windows = c.analysis.windows;
  double horizon = 0.0;
  for (const auto& w : windows) horizon = std::max(horizon, w.t1);
  auto run_spec = spec;
  run_spec.T = horizon;
  Table t{"h,m," + sde::krylov_csv_header(), {}};

  const pde::ScalarPtr f = c.analysis.f.empty() ? nullptr : pde::scalar_from_id(c.drift.d, c.analysis.f);
  sde::OccupationObserver occ(nullptr, f, windows);
  sde::SimulateOptions opt;
  opt.observers.push_back(&occ);
  const auto ens = simulate_checked(rec, b, run_spec, opt, "b");
  double lo = INFINITY, hi = 0.0;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    sde::KrylovPair k;
    k.t0 = windows[w].t0;
    k.t1 = windows[w].t1;
    const auto st = occ.window_mean(w, ens.excluded);
    k.lhs = std::abs(st.mean);
    k.lhs_stderr = st.stderr_;
    k.rhs = rec.stage("rhs", [&] {
      return sde::krylov_rhs(b, f, c.drift.d, c.analysis.p, c.analysis.theta, windows[w], rho, krylov_grid(c));
    });
    k.degenerate = k.lhs == 0.0 || k.rhs == 0.0;
    k.fitted_C = k.degenerate ? 0.0 : k.lhs / k.rhs;
    if (k.degenerate) rec.warn("degenerate Krylov pair on window " + fmt(k.t0) + ":" + fmt(k.t1));
    lo = std::min(lo, k.fitted_C);
    hi = std::max(hi, k.fitted_C);
    t.rows.push_back("b,0," + sde::krylov_csv_row(k));
  }
  summary.push_back("fitted C in [" + fmt(lo) + ", " + fmt(hi) + "]");

  if (!c.analysis.ms.empty()) {
    const auto phi = pde::scalar_from_id(c.drift.d, c.analysis.phi);
    const auto fg = grad_norm(phi);
    const sde::TimeWindow w{0.0, horizon};
    std::vector<double> lhs;
    for (int m : c.analysis.ms) {
      const auto h = drift::make_difference(build_drift(c.drift, c.drift.delta, m), build_drift(c.drift, c.drift.delta, 2 * m));
      sde::OccupationObserver o2(h, fg, {w});
      sde::SimulateOptions o2opt;
      o2opt.observers.push_back(&o2);
      const auto e2 = simulate_checked(rec, b, run_spec, o2opt, "m=" + std::to_string(m));
      sde::KrylovPair k;
      k.t0 = w.t0;
      k.t1 = w.t1;
      const auto st = o2.window_mean(0, e2.excluded);
      k.lhs = std::abs(st.mean);
      k.lhs_stderr = st.stderr_;
      k.rhs = sde::krylov_rhs(h, fg, c.drift.d, c.analysis.p, c.analysis.theta, w, rho, krylov_grid(c));
      k.degenerate = k.lhs == 0.0 || k.rhs == 0.0;
      k.fitted_C = k.degenerate ? 0.0 : k.lhs / k.rhs;
      t.rows.push_back("b_m-b_2m," + std::to_string(m) + "," + sde::krylov_csv_row(k));
      lhs.push_back(k.lhs);
    }
    const bool dec = std::is_sorted(lhs.rbegin(), lhs.rend()) &&
                     std::adjacent_find(lhs.begin(), lhs.end()) == lhs.end();
    summary.push_back(std::string("difference LHS ") + (dec ? "decreasing" : "NOT decreasing") + " in m");
  }
  return t;
}

Table run_scaling(const ExperimentConfig& c, Recorder& rec, std::vector<std::string>& summary) {
  const auto spec = ensemble_of(c);
  const auto b = build_drift(c.drift);
  const auto& windows = c.analysis.windows;
  double horizon = 0.0;
  for (const auto& w : windows) horizon = std::max(horizon, w.t1);
  auto run_spec = spec;
  run_spec.T = horizon;
  sde::OccupationObserver occ(nullptr, nullptr, windows);
  sde::SimulateOptions opt;
  opt.observers.push_back(&occ);
  const auto ens = simulate_checked(rec, b, run_spec, opt, "b");
  std::vector<double> len, lhs;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    len.push_back(windows[w].t1 - windows[w].t0);
    lhs.push_back(occ.window_mean(w, ens.excluded).mean);
  }
  const auto fit = sde::fit_power_law(len, lhs);
  Table t{"t0,t1,length,lhs,mu,intercept,r2", {}};
  for (std::size_t w = 0; w < windows.size(); ++w)
    t.rows.push_back(join(std::vector<double>{windows[w].t0, windows[w].t1, len[w], lhs[w], fit.mu, fit.intercept, fit.r2}, ','));
  summary.push_back("mu = " + fmt(fit.mu) + ", R^2 = " + fmt(fit.r2));
  return t;
}

}  // namespace

std::string version() { return SSLAB_VERSION; }

std::string manifest_line(const std::string& hash) { return "# manifest=" + hash + " version=" + version(); }

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["hash"] = hash;
  j["version"] = version;
  j["experiment"] = experiment;
  j["wall_seconds"] = wall_seconds;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : stages) j["stages"].push_back({{"name", s.name}, {"seconds", s.seconds}});
  j["warnings"] = warnings;
  j["outputs"] = outputs;
  j["config"] = config;
  return j.dump(2) + "\n";
}

void write_csv_file(const std::string& path, const std::string& hash, const std::string& body) {
  write_atomic(path, [&](std::ostream& os) { os << manifest_line(hash) << "\n" << body; });
}

std::string csv_body(const std::string& file_text) {
  std::istringstream in(file_text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + "\n";
  return out;
}

RunResult run(const ExperimentConfig& config) {
  RunResult result;
  auto& m = result.manifest;
  m.hash = config.hash();
  m.version = version();
  m.experiment = to_string(config.experiment);
  m.config = config.entries;
  Recorder rec(m);
  const auto t0 = Clock::now();
  Table table;
  try {
    switch (config.experiment) {
      case Experiment::certify: table = run_certify(config, rec, result.summary); break;
      case Experiment::solve: table = run_solve(config, rec, result.summary, m); break;
      case Experiment::energy: table = run_energy(config, rec, result.summary, result.explain); break;
      case Experiment::supbound: table = run_supbound(config, rec, result.summary, result.explain); break;
      case Experiment::dgiter: table = run_dgiter(config, rec, result.summary); break;
      case Experiment::hitting_scan: table = run_hitting(config, rec, result.summary); break;
      case Experiment::martingale: table = run_martingale(config, rec, result.summary); break;
      case Experiment::krylov: table = run_krylov(config, rec, result.summary); break;
      case Experiment::scaling: table = run_scaling(config, rec, result.summary); break;
    }
  } catch (const Error& e) {
    throw Error(e.code(), to_string(config.experiment) + ": " + e.what());
  }
  result.csv = table.text();
  m.wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!config.output.empty()) {
    if (config.experiment != Experiment::solve) {
      write_csv_file(config.output, m.hash, result.csv);
      m.outputs.push_back(config.output);
    }
    const std::string json = m.to_json();
    write_atomic(config.output + ".manifest.json", [&](std::ostream& os) { os << json; });
  }
  return result;
}

}  // namespace sslab::runner
