#include "sslab/sde/martingale.hpp"

#include <algorithm>
#include <cmath>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sslab/sde/stats.hpp"

namespace sslab::sde {

std::string to_string(GFunctional g) {
  switch (g) {
    case GFunctional::one: return "one";
    case GFunctional::clip_phi: return "clip-phi";
    case GFunctional::clip_mean: return "clip-mean";
  }
  return "?";
}

GFunctional g_from_string(const std::string& s) {
  for (auto g : {GFunctional::one, GFunctional::clip_phi, GFunctional::clip_mean})
    if (to_string(g) == s) return g;
  fail(ErrorCode::invalid_parameter, "unknown path functional '" + s + "' (one, clip-phi, clip-mean)");
}

MartingaleObserver::MartingaleObserver(pde::ScalarPtr phi, double t0, double t1, GFunctional g,
                                       drift::DriftPtr b_eval)
    : phi_(std::move(phi)), t0_(t0), t1_(t1), g_(g), b_eval_(std::move(b_eval)) {
  require(phi_ != nullptr, ErrorCode::invalid_parameter, "test function is missing");
  require(!phi_->time_dependent(), ErrorCode::invalid_parameter, "test function must not depend on time");
  require(t0_ >= 0.0 && t0_ < t1_, ErrorCode::invalid_parameter, "need 0 <= t0 < t1");
}

void MartingaleObserver::prepare(const EnsembleSpec& spec) {
  require(phi_->d() == spec.d, ErrorCode::invalid_dimension, "test function dimension does not match the paths");
  if (b_eval_) require(b_eval_->d() == spec.d, ErrorCode::invalid_dimension, "drift dimension does not match");
  require(t1_ <= spec.T * (1.0 + 1e-12), ErrorCode::out_of_range, "t1 exceeds the horizon");
  k0_ = step_index(spec, t0_);
  k1_ = step_index(spec, t1_);
  for (auto* v : {&phi0_, &integral_, &m0_, &m1_, &gval_, &mean_x_}) v->assign(spec.M, 0.0);
}

void MartingaleObserver::observe(const StepView& v) {
  if (v.step > k1_) return;
  const int d = v.d;
  std::vector<double> own;
  double* own_p[simd::kMaxPathDim];
  const double* const* drift = v.drift;
  if (b_eval_ && v.step < k1_) {
    own.resize(static_cast<std::size_t>(d) * v.count);
    for (int a = 0; a < d; ++a) own_p[a] = own.data() + static_cast<std::size_t>(a) * v.count;
    b_eval_->eval_block(v.t, v.count, v.x, own_p);
    drift = own_p;
  }
  double x[simd::kMaxPathDim], grad[simd::kMaxPathDim];
  for (std::size_t i = 0; i < v.count; ++i) {
    const std::size_t p = v.first_path + i;
    for (int a = 0; a < d; ++a) x[a] = v.x[a][i];
    const double ph = phi_->value(v.t, x);
    if (v.step == 0) phi0_[p] = ph;
    const double m = ph - phi0_[p] + integral_[p];
    if (v.step == k0_) {
      m0_[p] = m;
      switch (g_) {
        case GFunctional::one: gval_[p] = 1.0; break;
        case GFunctional::clip_phi: gval_[p] = std::clamp(2.0 * ph - 1.0, -1.0, 1.0); break;
        case GFunctional::clip_mean:
          gval_[p] = std::clamp(k0_ == 0 ? x[0] : mean_x_[p] / static_cast<double>(k0_), -1.0, 1.0);
          break;
      }
    }
    if (v.step < k0_) mean_x_[p] += x[0];
    if (v.step == k1_) {
      m1_[p] = m;
      continue;
    }
    phi_->gradient(v.t, x, grad);
    double adv = 0.0;
    for (int a = 0; a < d; ++a) adv += drift[a][i] * grad[a];
    integral_[p] += (adv - phi_->laplacian(v.t, x)) * v.dt;
  }
}

MartingaleDefect MartingaleObserver::result(const std::vector<std::uint8_t>& excluded) const {
  std::vector<double> prod(m0_.size());
  for (std::size_t p = 0; p < prod.size(); ++p) prod[p] = (m1_[p] - m0_[p]) * gval_[p];
  const auto s = mean_stat(prod, &excluded);
  MartingaleDefect out;
  out.phi = phi_->id();
  out.t0 = t0_;
  out.t1 = t1_;
  out.g = g_;
  out.defect = s.mean;
  out.stderr_ = s.stderr_;
  out.M = s.n;
  return out;
}

MartingaleDefect martingale_defect(const drift::DriftPtr& b, const EnsembleSpec& spec, const pde::ScalarPtr& phi,
                                   double t0, double t1, GFunctional g, const drift::DriftPtr& b_eval) {
  MartingaleObserver obs(phi, t0, t1, g, b_eval);
  EnsembleSpec run = spec;
  run.T = t1;
  SimulateOptions opt;
  opt.observers.push_back(&obs);
  require(t1 <= spec.T * (1.0 + 1e-12), ErrorCode::out_of_range, "t1 exceeds the horizon");
  const auto ens = simulate(b, run, opt);
  return obs.result(ens.excluded);
}

std::string defect_csv_header() { return "n,phi,g,t0,t1,M,defect,stderr"; }

std::string defect_csv_row(const MartingaleDefect& m, int n) {
  return join(std::vector<std::string>{std::to_string(n), m.phi, to_string(m.g), fmt(m.t0), fmt(m.t1),
                                       std::to_string(m.M), fmt(m.defect), fmt(m.stderr_)},
              ',');
}

}  // namespace sslab::sde
