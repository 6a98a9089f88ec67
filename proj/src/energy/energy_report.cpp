#include "sslab/energy/energy_report.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sslab/drift/mollify.hpp"
#include "sampling.hpp"

namespace sslab::energy {

namespace {

constexpr double kGrowth = 1.5;  // per-piece factor once the Gronwall term is below 1/3
constexpr int kMaxPieces = 2000;

double conjugate(double p) { return p / (p - 1.0); }

double max_coefficient(double p, double delta) { return 4.0 * (p - 1.0) / p - 2.0 * std::sqrt(delta); }

void gate(double p, const FormBound& b) {
  require(b.delta >= 0.0 && b.g >= 0.0, ErrorCode::invalid_parameter, "form bound must be nonnegative");
  require(p >= 2.0, ErrorCode::exponent_range, "energy inequality needs p >= 2, got p=" + fmt(p));
  const double a = max_coefficient(p, b.delta);
  require(a > 1e-12, ErrorCode::exponent_range,
          "energy inequality needs p > p_delta (4(p-1)/p - 2 sqrt(delta) = " + fmt(a) + " at p=" + fmt(p) +
              ", delta=" + fmt(b.delta) + ")");
}

double objective(const RecipeConstants& r) { return r.C1 + r.C2 + r.C3; }

}  // namespace

FormBound known_form_bound(const drift::DriftField* field) {
  using drift::DriftKind;
  if (!field) return {};
  switch (field->kind()) {
    case DriftKind::inverse_square:
      return {field->params()[0], 0.0};
    case DriftKind::bounded_smooth: {
      const double B = field->sup_bound().value_or(0.0);
      if (B == 0.0) return {};
      return {0.25, B * B};
    }
    case DriftKind::lps_power: {
      const double a = field->params()[0], amp = field->params()[1];
      require(a <= 1.0, ErrorCode::invalid_parameter, "lps-power with a > 1 has no form bound");
      const double k = 0.5 * (field->d() - 2);
      return {amp * amp / (k * k), 0.0};
    }
    case DriftKind::mollified: {
      const auto* m = dynamic_cast<const drift::MollifiedField*>(field);
      require(m != nullptr, ErrorCode::invalid_parameter, "unknown mollified field");
      return known_form_bound(&m->inner());
    }
    case DriftKind::difference:
      break;
  }
  fail(ErrorCode::invalid_parameter, "no known form bound for '" + field->id() + "'");
}

RecipeConstants recipe_at(double p, const FormBound& b, const FormBound& h, double window, const Epsilons& eps,
                          double beta2_kappa) {
  gate(p, b);
  require(window > 0.0 && std::isfinite(window), ErrorCode::invalid_parameter, "time window must be positive");
  require(eps.e1 > 0 && eps.e2 > 0 && eps.e3 > 0 && eps.e4 > 0, ErrorCode::invalid_parameter,
          "epsilons must be positive");
  const double pp = conjugate(p);
  const double sd = std::sqrt(b.delta);
  const double e3 = std::pow(eps.e3, pp) / pp, e4 = std::pow(eps.e4, pp) / pp;

  RecipeConstants r;
  r.eps = eps;
  r.gradient_coefficient =
      max_coefficient(p, b.delta) - eps.e2 * sd - 2.0 * eps.e1 - p * (1.0 + eps.e2) * h.delta * e3;
  require(r.gradient_coefficient > 0.0, ErrorCode::recipe_failure,
          "gradient coefficient " + fmt(r.gradient_coefficient) + " is not positive");
  const double A = r.gradient_coefficient;

  r.C2_local = 2.0 / eps.e1 + sd * (1.0 + 1.0 / eps.e2) + p * (1.0 + 1.0 / eps.e2) * h.delta * e3;
  r.C3_local = std::max(std::pow(eps.e3, -p), std::pow(eps.e4, -p));
  r.gamma = (b.delta > 0.0 ? b.g / sd : 0.0) + p * e3 * h.g + p * e4 + r.C2_local * beta2_kappa;
  const double pieces = std::floor(3.0 * r.gamma * window) + 1.0;
  require(pieces <= kMaxPieces, ErrorCode::recipe_failure,
          "window needs " + fmt(pieces) + " pieces; constants overflow");
  r.pieces = static_cast<int>(pieces);

  // growth^j, sigma_j = sum_{i=1..j} growth^i
  double pow_sum = 0.0, sigma_sum = 0.0, power = 1.0, sigma = 0.0;
  for (int j = 0; j < r.pieces; ++j) {
    pow_sum += power;
    sigma_sum += sigma;
    power *= kGrowth;
    sigma += power;
  }
  const double lambda = beta2_kappa > 0.0 ? (1.0 + 1.0 / eps.e2) * beta2_kappa * window : 0.0;
  const double grad_share = (1.0 + eps.e2) * kGrowth / A;
  r.C1 = (1.0 + lambda) * power + grad_share * pow_sum;
  const double F = (1.0 + lambda) * sigma + grad_share * (1.0 + sigma_sum);
  r.C2 = beta2_kappa > 0.0 ? 0.0 : F * r.C2_local + (1.0 + 1.0 / eps.e2);
  r.C3 = F * r.C3_local;
  r.target_coefficient = std::min(0.1, 0.5 * max_coefficient(p, b.delta));
  return r;
}

RecipeConstants recipe_constants(double p, const FormBound& b, const FormBound& h, double window,
                                 double beta2_kappa) {
  gate(p, b);
  const double target = std::min(0.1, 0.5 * max_coefficient(p, b.delta));
  auto eval = [&](const Epsilons& e) -> std::optional<RecipeConstants> {
    try {
      auto r = recipe_at(p, b, h, window, e, beta2_kappa);
      if (r.gradient_coefficient < target || !std::isfinite(objective(r))) return std::nullopt;
      return r;
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  const double amax = max_coefficient(p, b.delta);
  const double e12 = std::min(1e-3, amax / 8.0);
  Epsilons cur{e12, b.delta > 0.0 ? std::min(1e-3, amax / (8.0 * std::sqrt(b.delta))) : 1e-3, 1.0, 1.0};
  std::optional<RecipeConstants> best;
  for (int i = 0; i < 40 && !(best = eval(cur)); ++i) {
    cur.e3 *= 0.5;
    if (i >= 20) cur = {cur.e1 * 0.1, cur.e2 * 0.1, cur.e3, cur.e4 * 0.5};
  }
  require(best.has_value(), ErrorCode::recipe_failure,
          "no admissible epsilons at p=" + fmt(p) + ", delta=" + fmt(b.delta) + ", nu=" + fmt(h.delta) +
              ": a positive gradient coefficient forces eps3^-p or the window split past double range");

  double* slots[4] = {&cur.e1, &cur.e2, &cur.e3, &cur.e4};
  for (int sweep = 0; sweep < 30; ++sweep) {
    bool improved = false;
    for (double* slot : slots) {
      const double keep = *slot;
      double arg = keep;
      for (int k = 0; k <= 200; ++k) {
        *slot = std::pow(10.0, -9.0 + 0.05 * k);
        if (auto r = eval(cur); r && objective(*r) < objective(*best) * (1.0 - 1e-12)) {
          best = r;
          arg = *slot;
          improved = true;
        }
      }
      *slot = arg;
    }
    if (!improved) break;
  }
  best->target_coefficient = target;
  return *best;
}

double EnergyReport::rhs() const {
  return constants.C1 * rhs_initial + constants.C2 * rhs_gradweight + constants.C3 * rhs_source;
}

std::string EnergyReport::explain() const {
  std::ostringstream o;
  o << "energy inequality p=" << fmt(p) << " c=" << fmt(c) << " window=[" << fmt(s) << "," << fmt(t) << "]"
    << (weighted ? " weight=rho" : " weight=eta") << "\n";
  o << "  eps1=" << fmt(constants.eps.e1) << " eps2=" << fmt(constants.eps.e2) << " eps3=" << fmt(constants.eps.e3)
    << " eps4=" << fmt(constants.eps.e4) << "\n";
  o << "  gradient coefficient=" << fmt(constants.gradient_coefficient) << " (target "
    << fmt(constants.target_coefficient) << ") gamma=" << fmt(constants.gamma) << " pieces=" << constants.pieces
    << "\n";
  o << "  C1=" << fmt(constants.C1) << " C2=" << fmt(constants.C2) << " C3=" << fmt(constants.C3) << "\n";
  o << "  lhs: sup=" << fmt(lhs_sup) << " grad=" << fmt(lhs_grad) << " total=" << fmt(lhs()) << "\n";
  o << "  rhs: C1*" << fmt(rhs_initial) << " + C2*" << fmt(rhs_gradweight) << " + C3*" << fmt(rhs_source) << " = "
    << fmt(rhs()) << "\n";
  o << "  satisfied=" << (satisfied ? "true" : "false") << "\n";
  return o.str();
}

namespace {

struct WeightSamples {
  std::vector<double> w, grad2;  // w and |grad w|^2 at nodes
  std::vector<std::vector<double>> grad;
  bool weighted = false;
  double beta2_kappa = 0.0;
};

WeightSamples sample(const WeightChoice& choice, const pde::Grid& grid) {
  WeightSamples s;
  const std::size_t n = grid.node_count();
  s.w.resize(n);
  s.grad2.assign(n, 0.0);
  s.grad.assign(static_cast<std::size_t>(grid.d), std::vector<double>(n));
  double x[simd::kMaxGridDim], g[simd::kMaxGridDim];
  for (std::size_t i = 0; i < n; ++i) {
    grid.position(i, x);
    std::visit(
        [&](const auto& w) {
          s.w[i] = w.value(x, grid.d);
          w.gradient(x, grid.d, g);
        },
        choice);
    for (int a = 0; a < grid.d; ++a) {
      s.grad[a][i] = g[a];
      s.grad2[i] += g[a] * g[a];
    }
  }
  if (const auto* rho = std::get_if<Weight>(&choice)) {
    s.weighted = true;
    s.beta2_kappa = rho->beta() * rho->beta() * rho->kappa();
  }
  return s;
}

struct Window {
  std::size_t ks = 0, kt = 0;
};

Window snap(const pde::GridSolution& u, double s, double t) {
  require(u.frame_count() > 0, ErrorCode::invalid_parameter, "solution has no frames");
  require(s < t, ErrorCode::invalid_parameter, "window needs s < t");
  auto nearest = [&](double v) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < u.frame_count(); ++k)
      if (std::abs(u.time(k) - v) < std::abs(u.time(best) - v)) best = k;
    return best;
  };
  Window w{nearest(s), nearest(t)};
  require(w.ks < w.kt, ErrorCode::invalid_parameter, "window collapses onto a single stored frame");
  return w;
}

void check_inputs(const pde::GridSolution& u, const EnergyInputs& in) {
  const auto& g = u.grid();
  if (in.b) require(in.b->d() == g.d, ErrorCode::grid_mismatch, "drift dimension differs from grid");
  in.src.validate(g);
}

}  // namespace

EnergyReport energy_report(const pde::GridSolution& u, const EnergyInputs& in, double p, double s, double t,
                           double c, const WeightChoice& weight) {
  gate(p, in.b_bound);
  check_inputs(u, in);
  const auto& g = u.grid();
  const Window win = snap(u, s, t);
  const auto ws = sample(weight, g);

  EnergyReport r;
  r.p = p;
  r.c = c;
  r.s = u.time(win.ks);
  r.t = u.time(win.kt);
  r.weighted = ws.weighted;
  r.constants = recipe_constants(p, in.b_bound, in.h_bound, r.t - r.s, ws.beta2_kappa);

  const double vol = detail::cell_volume(g);
  const auto strides = g.strides();
  const std::size_t n = g.node_count();
  detail::SourceSampler src(in.src, g);
  std::vector<double> a(n);

  for (std::size_t k = win.ks; k <= win.kt; ++k) {
    const auto& f = u.frame(k);
    double S = 0.0, Y = 0.0, G = 0.0, H = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::max(f[i] - c, 0.0);
      const double vp = std::pow(v, p);
      const double w2 = ws.w[i] * ws.w[i];
      S += vp * w2;
      Y += vp * ws.grad2[i];
      a[i] = ws.w[i] * std::pow(v, 0.5 * p);
    }
    // edge differences of w v^{p/2}
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = g.multi_index(i);
      for (int ax = 0; ax < g.d; ++ax) {
        if (idx[ax] + 1 >= g.nodes_per_axis()) continue;
        const double dlt = a[i + static_cast<std::size_t>(strides[ax])] - a[i];
        G += dlt * dlt;
      }
    }
    G /= g.h * g.h;
    if (k == win.ks) {
      r.rhs_initial = S * vol;
      r.lhs_sup = S * vol;
      continue;
    }
    src.at(u.time(k));
    for (std::size_t i = 0; i < n; ++i) {
      if (f[i] <= c || src.f[i] == 0.0) continue;
      H += detail::chi(src.hmag[i], p) * std::pow(std::abs(src.f[i]), p) * ws.w[i] * ws.w[i];
    }
    const double dt = u.time(k) - u.time(k - 1);
    r.lhs_sup = std::max(r.lhs_sup, S * vol);
    r.lhs_grad += dt * G * vol;
    r.rhs_gradweight += dt * Y * vol;
    r.rhs_source += dt * H * vol;
  }
  r.satisfied = r.lhs() <= r.rhs() * (1.0 + 1e-12);
  return r;
}

IdentityResidual energy_identity(const pde::GridSolution& u, const EnergyInputs& in, double p, double s, double t,
                                 double c, const WeightChoice& weight) {
  require(p >= 1.0, ErrorCode::exponent_range, "identity needs p >= 1");
  check_inputs(u, in);
  const auto& g = u.grid();
  const Window win = snap(u, s, t);
  const auto ws = sample(weight, g);
  const double vol = detail::cell_volume(g);
  const auto strides = g.strides();
  const std::size_t n = g.node_count();
  detail::SourceSampler src(in.src, g);
  std::vector<double> a(n), vpm1(n);

  auto mass = [&](const std::vector<double>& f) {
    double S = 0.0;
    for (std::size_t i = 0; i < n; ++i) S += std::pow(std::max(f[i] - c, 0.0), p) * ws.w[i] * ws.w[i];
    return S * vol;
  };

  IdentityResidual r;
  r.time_term = mass(u.frame(win.kt)) - mass(u.frame(win.ks));
  for (std::size_t k = win.ks + 1; k <= win.kt; ++k) {
    const auto& f = u.frame(k);
    const double tk = u.time(k);
    const double dt = tk - u.time(k - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::max(f[i] - c, 0.0);
      a[i] = std::pow(v, 0.5 * p);
      vpm1[i] = v > 0.0 ? std::pow(v, p - 1.0) : 0.0;
    }
    const auto b = pde::sample_drift(in.b, g, tk);
    src.at(tk);
    double diff = 0.0, cross = 0.0, adv = 0.0, source = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = ws.w[i];
      if (src.f[i] != 0.0) source += src.hmag[i] * src.f[i] * vpm1[i] * w * w;
      if (g.is_boundary(i) || (a[i] == 0.0 && w == 0.0)) continue;
      double grad2 = 0.0, gw = 0.0, bg = 0.0;
      for (int ax = 0; ax < g.d; ++ax) {
        const auto st = static_cast<std::size_t>(strides[ax]);
        const double da = (a[i + st] - a[i - st]) / (2.0 * g.h);
        grad2 += da * da;
        gw += da * ws.grad[ax][i];
        bg += b[ax][i] * da;
      }
      diff += grad2 * w * w;
      cross += gw * a[i] * w;
      adv += bg * a[i] * w * w;
    }
    r.diffusion += dt * vol * diff;
    r.cross += dt * vol * cross;
    r.advection += dt * vol * adv;
    r.source += dt * vol * source;
  }
  r.diffusion *= 4.0 * (p - 1.0) / p;
  r.cross *= 4.0;
  r.advection *= 2.0;
  r.source *= p;
  r.scale = std::abs(r.time_term) + std::abs(r.diffusion) + std::abs(r.cross) + std::abs(r.advection) +
            std::abs(r.source);
  const double sum = r.time_term + r.diffusion + r.cross + r.advection - r.source;
  r.residual = r.scale > 0.0 ? std::abs(sum) / r.scale : 0.0;
  return r;
}

pde::SourceSpec standard_source(int d) {
  std::vector<double> v(static_cast<std::size_t>(d), 4.0 / std::sqrt(static_cast<double>(d)));
  return pde::SourceSpec{drift::make_bounded_smooth(d, v, 0.5), pde::make_poly_bump(d, 1.0, 0.75)};
}

std::string energy_csv_header() {
  return "p,c,s,t,weight,lhs_sup,lhs_grad,rhs_initial,rhs_gradweight,rhs_source,C1,C2,C3,eps1,eps2,eps3,eps4,"
         "gradient_coefficient,pieces,lhs,rhs,satisfied";
}

std::string energy_csv_row(const EnergyReport& r) {
  const auto& k = r.constants;
  return join(std::vector<std::string>{fmt(r.p), fmt(r.c), fmt(r.s), fmt(r.t), r.weighted ? "rho" : "eta",
                                       fmt(r.lhs_sup), fmt(r.lhs_grad), fmt(r.rhs_initial), fmt(r.rhs_gradweight),
                                       fmt(r.rhs_source), fmt(k.C1), fmt(k.C2), fmt(k.C3), fmt(k.eps.e1),
                                       fmt(k.eps.e2), fmt(k.eps.e3), fmt(k.eps.e4), fmt(k.gradient_coefficient),
                                       std::to_string(k.pieces), fmt(r.lhs()), fmt(r.rhs()),
                                       r.satisfied ? "true" : "false"},
              ',');
}

}  // namespace sslab::energy
