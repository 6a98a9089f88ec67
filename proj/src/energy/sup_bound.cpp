#include "sslab/energy/sup_bound.hpp"

#include <algorithm>
#include <cmath>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sampling.hpp"

namespace sslab::energy {

double default_theta(int d) { return 0.5 * (1.0 + d / (d - 1.0)); }

std::string to_string(SupMode mode) { return mode == SupMode::local_ball ? "local_ball" : "weighted_global"; }

double source_norm_integral(const pde::SourceSpec& src, const pde::Grid& grid, double T, double p, double q,
                            const std::vector<double>& w) {
  require(w.size() == grid.node_count(), ErrorCode::grid_mismatch, "weight size differs from grid");
  detail::SourceSampler smp(src, grid);
  const bool varies = (src.h_field && src.h_field->time_dependent()) || (src.f && src.f->time_dependent());
  const int steps = varies ? std::max(1, static_cast<int>(std::lround(T / grid.tau))) : 1;
  const double dt = T / steps;
  double total = 0.0;
  for (int k = 1; k <= steps; ++k) {
    smp.at(k * dt);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (smp.f[i] == 0.0 || w[i] == 0.0) continue;
      acc += std::pow(detail::chi(smp.hmag[i], p), q) * std::pow(std::abs(smp.f[i]), p * q) * w[i];
    }
    total += dt * acc;
  }
  return total * detail::cell_volume(grid);
}

SupBoundReport sup_bound_check(const pde::GridSolution& u, const pde::SourceSpec& src, double p, double theta,
                               SupMode mode, const Weight& rho) {
  const auto& g = u.grid();
  const int d = g.d;
  require(p >= 1.0, ErrorCode::exponent_range, "sup bound needs p >= 1");
  require(theta > 1.0 && theta < d / (d - 1.0), ErrorCode::out_of_range,
          "theta=" + fmt(theta) + " outside (1, d/(d-1))");
  require(g.L >= 1.0, ErrorCode::grid_mismatch, "grid does not contain B(0,1)");
  require(u.frame_count() > 0, ErrorCode::invalid_parameter, "solution has no frames");
  src.validate(g);

  SupBoundReport r;
  r.mode = mode;
  r.p = p;
  r.theta = theta;
  r.theta_prime = theta / (theta - 1.0);
  const double q = r.theta_prime;
  const double T = u.time(u.frame_count() - 1) - u.time(0);
  const std::size_t n = g.node_count();
  std::vector<double> r2(n);
  double x[simd::kMaxGridDim];
  for (std::size_t i = 0; i < n; ++i) {
    g.position(i, x);
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += x[a] * x[a];
    r2[i] = s;
  }
  const double fuzz = 1e-12;

  if (mode == SupMode::local_ball) {
    std::vector<double> ball(n);
    for (std::size_t i = 0; i < n; ++i) ball[i] = r2[i] <= 1.0 + fuzz ? 1.0 : 0.0;
    for (std::size_t k = 0; k < u.frame_count(); ++k)
      for (std::size_t i = 0; i < n; ++i)
        if (r2[i] <= 0.25 + fuzz) r.lhs = std::max(r.lhs, u.frame(k)[i]);
    const double H = source_norm_integral(src, g, T, p, q, ball);
    r.source_term = 2.0 * std::pow(H, 1.0 / (p * q));
    double I1 = 0.0, I2 = 0.0;
    for (std::size_t k = 1; k < u.frame_count(); ++k) {
      const double dt = u.time(k) - u.time(k - 1);
      double a1 = 0.0, a2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = u.frame(k)[i];
        if (ball[i] == 0.0 || v <= 0.0) continue;
        a1 += std::pow(v, p);
        a2 += std::pow(v, p * theta);
      }
      I1 += dt * a1;
      I2 += dt * a2;
    }
    const double vol = detail::cell_volume(g);
    const double U = I1 * vol + std::pow(I2 * vol, 1.0 / theta);
    r.u_term = std::pow(U, 1.0 / p);
    r.implied_K = r.u_term > 0.0 ? std::max(r.lhs - r.source_term, 0.0) / r.u_term : 0.0;
    r.rhs = r.source_term + r.implied_K * r.u_term;
  } else {
    for (std::size_t k = 0; k < u.frame_count(); ++k)
      for (double v : u.frame(k)) r.lhs = std::max(r.lhs, std::abs(v));
    const int zmax = static_cast<int>(std::floor(g.L));
    const int side = 2 * zmax + 1;
    int total = 1;
    for (int a = 0; a < d; ++a) total *= side;
    std::vector<double> w(n);
    for (int code = 0; code < total; ++code) {
      std::array<double, 4> z{};
      int c = code;
      for (int a = 0; a < d; ++a, c /= side) z[a] = static_cast<double>(c % side - zmax);
      const Weight rz(rho.kappa(), rho.beta(), z);
      for (std::size_t i = 0; i < n; ++i) {
        g.position(i, x);
        const double v = rz.value(x, d);
        w[i] = v * v;
      }
      r.source_term = std::max(r.source_term, std::pow(source_norm_integral(src, g, T, p, q, w), 1.0 / (p * q)));
    }
    r.implied_K = r.source_term > 0.0 ? r.lhs / r.source_term : 0.0;
    r.rhs = r.implied_K * r.source_term;
  }
  const double denom = r.source_term + r.u_term;
  r.implied_C = r.lhs > 0.0 && denom > 0.0 ? r.lhs / denom : 0.0;
  return r;
}

std::string sup_csv_header() { return "mode,p,theta,lhs,source_term,u_term,implied_K,implied_C"; }

std::string sup_csv_row(const SupBoundReport& r) {
  return join(std::vector<std::string>{to_string(r.mode), fmt(r.p), fmt(r.theta), fmt(r.lhs), fmt(r.source_term),
                                       fmt(r.u_term), fmt(r.implied_K), fmt(r.implied_C)},
              ',');
}

}  // namespace sslab::energy
