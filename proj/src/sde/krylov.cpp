#include "sslab/sde/krylov.hpp"

#include <algorithm>
#include <cmath>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sslab/core/gauss.hpp"

namespace sslab::sde {

namespace {

double chi(double hmag, double p) { return hmag >= 1.0 ? 1.0 : std::pow(hmag, p); }

void check_window(const TimeWindow& w) {
  require(w.t0 >= 0.0 && w.t0 < w.t1, ErrorCode::invalid_parameter,
          "window [" + fmt(w.t0) + ", " + fmt(w.t1) + "] must satisfy 0 <= t0 < t1");
}

}  // namespace

OccupationObserver::OccupationObserver(drift::DriftPtr h, pde::ScalarPtr f, std::vector<TimeWindow> windows)
    : h_(std::move(h)), f_(std::move(f)), windows_(std::move(windows)) {
  require(!windows_.empty(), ErrorCode::invalid_parameter, "no time windows");
  for (const auto& w : windows_) check_window(w);
}

void OccupationObserver::prepare(const EnsembleSpec& spec) {
  if (h_) require(h_->d() == spec.d, ErrorCode::invalid_dimension, "h dimension does not match the paths");
  if (f_) require(f_->d() == spec.d, ErrorCode::invalid_dimension, "f dimension does not match the paths");
  k0_.clear();
  k1_.clear();
  for (const auto& w : windows_) {
    k0_.push_back(step_index(spec, w.t0));
    k1_.push_back(step_index(spec, w.t1));
  }
  acc_.assign(windows_.size(), std::vector<double>(spec.M, 0.0));
}

void OccupationObserver::observe(const StepView& v) {
  bool active = false;
  for (std::size_t w = 0; w < windows_.size(); ++w) active = active || (v.step >= k0_[w] && v.step < k1_[w]);
  if (!active) return;
  const int d = v.d;
  std::vector<double> own;
  double* own_p[simd::kMaxPathDim];
  const double* const* h = v.drift;
  if (h_) {
    own.resize(static_cast<std::size_t>(d) * v.count);
    for (int a = 0; a < d; ++a) own_p[a] = own.data() + static_cast<std::size_t>(a) * v.count;
    h_->eval_block(v.t, v.count, v.x, own_p);
    h = own_p;
  }
  double x[simd::kMaxPathDim];
  for (std::size_t i = 0; i < v.count; ++i) {
    double m2 = 0.0;
    for (int a = 0; a < d; ++a) m2 += h[a][i] * h[a][i];
    double val = std::sqrt(m2);
    if (f_ && val != 0.0) {
      for (int a = 0; a < d; ++a) x[a] = v.x[a][i];
      val *= std::abs(f_->value(v.t, x));
    }
    const double inc = val * v.dt;
    for (std::size_t w = 0; w < windows_.size(); ++w)
      if (v.step >= k0_[w] && v.step < k1_[w]) acc_[w][v.first_path + i] += inc;
  }
}

MeanStat OccupationObserver::window_mean(std::size_t w, const std::vector<std::uint8_t>& excluded) const {
  return mean_stat(acc_.at(w), &excluded);
}

double krylov_rhs(const drift::DriftPtr& h, const pde::ScalarPtr& f, int d, double p, double theta, TimeWindow w,
                  const energy::Weight& rho, const KrylovGrid& grid) {
  require(d >= 2 && d <= simd::kMaxGridDim, ErrorCode::invalid_dimension, "space-time bound needs 2 <= d <= 4");
  require(p >= 1.0, ErrorCode::exponent_range, "p must be >= 1");
  require(theta > 1.0 && theta < d / (d - 1.0), ErrorCode::out_of_range,
          "theta=" + fmt(theta) + " outside (1, d/(d-1))");
  require(grid.L > 0.0 && grid.h > 0.0 && grid.time_nodes >= 1, ErrorCode::invalid_parameter, "bad quadrature grid");
  require(h && h->d() == d, ErrorCode::invalid_dimension, "h is missing or has the wrong dimension");
  if (f) require(f->d() == d, ErrorCode::invalid_dimension, "f has the wrong dimension");
  check_window(w);
  const double tp = theta / (theta - 1.0);
  const double e = p * tp;

  const bool varies = h->time_dependent() || (f && f->time_dependent());
  std::vector<double> tn, tw;
  if (varies) {
    const auto& rule = gauss_legendre(grid.time_nodes);
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
      tn.push_back(0.5 * (w.t0 + w.t1) + 0.5 * (w.t1 - w.t0) * rule.x[k]);
      tw.push_back(0.5 * (w.t1 - w.t0) * rule.w[k]);
    }
  } else {
    tn.push_back(w.t0);
    tw.push_back(w.t1 - w.t0);
  }

  const int per_axis = static_cast<int>(std::lround(2.0 * grid.L / grid.h)) + 1;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(per_axis);
  const double vol = std::pow(grid.h, d);
  std::vector<double> coord[simd::kMaxGridDim];
  std::vector<double> value;
  double x[simd::kMaxGridDim], b[simd::kMaxPathDim];
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (int a = 0; a < d; ++a) {
      x[a] = -grid.L + grid.h * static_cast<double>(rem % static_cast<std::size_t>(per_axis));
      rem /= static_cast<std::size_t>(per_axis);
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < tn.size(); ++k) {
      const double fv = f ? std::abs(f->value(tn[k], x)) : 1.0;
      if (fv == 0.0) continue;
      h->eval(tn[k], x, b);
      double m2 = 0.0;
      for (int a = 0; a < d; ++a) m2 += b[a] * b[a];
      acc += tw[k] * std::pow(chi(std::sqrt(m2), p), tp) * std::pow(fv, e);
    }
    if (acc == 0.0) continue;
    for (int a = 0; a < d; ++a) coord[a].push_back(x[a]);
    value.push_back(acc * vol);
  }
  if (value.empty()) return 0.0;

  simd::PointCloudView pts;
  pts.d = d;
  pts.n = value.size();
  for (int a = 0; a < d; ++a) pts.coord[a] = coord[a].data();
  pts.value = value.data();
  const double power = 2.0 * rho.beta();
  const bool integral_power = std::abs(power - std::round(power)) < 1e-12;
  const auto& kernels = simd::active_kernels();
  const int zmax = static_cast<int>(std::floor(grid.L));
  const int zn = 2 * zmax + 1;
  std::size_t zcount = 1;
  for (int a = 0; a < d; ++a) zcount *= static_cast<std::size_t>(zn);
  double best = 0.0;
  for (std::size_t zi = 0; zi < zcount; ++zi) {
    double z[simd::kMaxGridDim] = {0.0, 0.0, 0.0, 0.0};
    std::size_t rem = zi;
    for (int a = 0; a < d; ++a) {
      z[a] = static_cast<double>(static_cast<int>(rem % static_cast<std::size_t>(zn)) - zmax);
      rem /= static_cast<std::size_t>(zn);
    }
    double s = 0.0;
    if (integral_power) {
      s = kernels.translate_weighted_sum(pts, z, rho.kappa(), static_cast<int>(std::lround(power)));
    } else {
      for (std::size_t i = 0; i < pts.n; ++i) {
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) r2 += (coord[a][i] - z[a]) * (coord[a][i] - z[a]);
        s += value[i] * std::pow(1.0 + rho.kappa() * r2, -power);
      }
    }
    best = std::max(best, s);
  }
  return std::pow(best, 1.0 / e);
}

std::vector<KrylovPair> krylov_statistic(const drift::DriftPtr& b, const EnsembleSpec& spec,
                                         const drift::DriftPtr& h, const pde::ScalarPtr& f, double p, double theta,
                                         const std::vector<TimeWindow>& windows, const energy::Weight& rho,
                                         const KrylovGrid& grid) {
  const drift::DriftPtr h_eff = h ? h : (b ? b : drift::make_zero(spec.d));
  OccupationObserver obs(h, f, windows);
  EnsembleSpec run = spec;
  double horizon = 0.0;
  for (const auto& w : windows) horizon = std::max(horizon, w.t1);
  require(horizon <= spec.T * (1.0 + 1e-12), ErrorCode::out_of_range, "window exceeds the horizon");
  run.T = horizon;
  SimulateOptions opt;
  opt.observers.push_back(&obs);
  const auto ens = simulate(b, run, opt);

  std::vector<KrylovPair> out;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    KrylovPair k;
    k.t0 = windows[w].t0;
    k.t1 = windows[w].t1;
    const auto st = obs.window_mean(w, ens.excluded);
    k.lhs = std::abs(st.mean);
    k.lhs_stderr = st.stderr_;
    k.rhs = krylov_rhs(h_eff, f, spec.d, p, theta, windows[w], rho, grid);
    k.degenerate = k.rhs == 0.0 || k.lhs == 0.0;
    k.fitted_C = k.degenerate ? 0.0 : k.lhs / k.rhs;
    out.push_back(k);
  }
  return out;
}

ScalingResult drift_integral_scaling(const drift::DriftPtr& b, const EnsembleSpec& spec,
                                     const std::vector<TimeWindow>& windows) {
  OccupationObserver obs(nullptr, nullptr, windows);
  EnsembleSpec run = spec;
  double horizon = 0.0;
  for (const auto& w : windows) horizon = std::max(horizon, w.t1);
  require(horizon <= spec.T * (1.0 + 1e-12), ErrorCode::out_of_range, "window exceeds the horizon");
  run.T = horizon;
  SimulateOptions opt;
  opt.observers.push_back(&obs);
  const auto ens = simulate(b, run, opt);
  ScalingResult r;
  r.windows = windows;
  std::vector<double> len;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    r.lhs.push_back(obs.window_mean(w, ens.excluded).mean);
    len.push_back(windows[w].t1 - windows[w].t0);
  }
  r.fit = fit_power_law(len, r.lhs);
  return r;
}

std::string krylov_csv_header() { return "t0,t1,lhs,lhs_stderr,rhs,fitted_C,degenerate"; }

std::string krylov_csv_row(const KrylovPair& k) {
  return join(std::vector<std::string>{fmt(k.t0), fmt(k.t1), fmt(k.lhs), fmt(k.lhs_stderr), fmt(k.rhs),
                                       fmt(k.fitted_C), k.degenerate ? "1" : "0"},
              ',');
}

}  // namespace sslab::sde
