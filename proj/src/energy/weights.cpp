#include "sslab/energy/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "sslab/core/error.hpp"

namespace sslab::energy {

namespace {

double smoothstep(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }
double smoothstep_d1(double s) { return 30.0 * s * s * (1.0 - s) * (1.0 - s); }
double smoothstep_d2(double s) { return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s); }

double sup_on_unit(double (*f)(double)) {
  double m = 0.0;
  for (int i = 0; i <= 4096; ++i) m = std::max(m, std::abs(f(i / 4096.0)));
  return m;
}

double norm(const double* x, int d) {
  double r2 = 0.0;
  for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
  return std::sqrt(r2);
}

template <class F>
GradientCheck check_field(const pde::Grid& grid, F&& value, double tol,
                          const std::function<double(const double*)>& bound) {
  GradientCheck out;
  out.tolerance = tol;
  const auto n = grid.node_count();
  double x[simd::kMaxGridDim], y[simd::kMaxGridDim];
  for (std::size_t i = 0; i < n; ++i) {
    if (grid.is_boundary(i)) continue;
    grid.position(i, x);
    double g2 = 0.0;
    for (int a = 0; a < grid.d; ++a) {
      std::copy(x, x + grid.d, y);
      y[a] = x[a] + grid.h;
      const double up = value(y);
      y[a] = x[a] - grid.h;
      const double dn = value(y);
      const double g = (up - dn) / (2.0 * grid.h);
      g2 += g * g;
    }
    const double b = bound(x);
    if (b > 0.0) out.max_ratio = std::max(out.max_ratio, std::sqrt(g2) / b);
    else if (g2 > 0.0) out.max_ratio = INFINITY;
  }
  out.ok = out.max_ratio <= 1.0 + tol;
  return out;
}

}  // namespace

CutoffFamily::CutoffFamily(double r, double R) : r_(r), R_(R) {
  require(r > 0.0 && R > r && std::isfinite(R), ErrorCode::invalid_parameter, "cutoff needs 0 < r < R");
}

double CutoffFamily::c0() {
  static const double c = 4.0 * sup_on_unit(smoothstep_d1);
  return c;
}

double CutoffFamily::value(const double* x, int d) const {
  const double s = std::clamp((R_ - norm(x, d)) / (R_ - r_), 0.0, 1.0);
  return smoothstep(s);
}

void CutoffFamily::gradient(const double* x, int d, double* g) const {
  const double rho = norm(x, d);
  const double s = (R_ - rho) / (R_ - r_);
  const double dv = (s <= 0.0 || s >= 1.0 || rho == 0.0) ? 0.0 : -smoothstep_d1(s) / ((R_ - r_) * rho);
  for (int a = 0; a < d; ++a) g[a] = dv * x[a];
}

Weight::Weight(double kappa, double beta, std::array<double, 4> center)
    : kappa_(kappa), beta_(beta), center_(center) {
  require(kappa > 0.0 && std::isfinite(kappa), ErrorCode::invalid_parameter, "weight kappa must be positive");
  require(beta > 0.0 && std::isfinite(beta), ErrorCode::invalid_parameter, "weight beta must be positive");
}

Weight Weight::standard(int d) { return Weight(0.01, 0.25 * d + 0.25); }

double Weight::value(const double* x, int d) const {
  double r2 = 0.0;
  for (int a = 0; a < d; ++a) r2 += (x[a] - center_[a]) * (x[a] - center_[a]);
  return std::pow(1.0 + kappa_ * r2, -beta_);
}

void Weight::gradient(const double* x, int d, double* g) const {
  double r2 = 0.0;
  for (int a = 0; a < d; ++a) r2 += (x[a] - center_[a]) * (x[a] - center_[a]);
  const double f = -2.0 * beta_ * kappa_ * std::pow(1.0 + kappa_ * r2, -beta_ - 1.0);
  for (int a = 0; a < d; ++a) g[a] = f * (x[a] - center_[a]);
}

double Weight::log_gradient_bound() const { return beta_ * std::sqrt(kappa_); }

GradientCheck check_cutoff(const CutoffFamily& eta, const pde::Grid& grid) {
  grid.validate();
  const double w = eta.R() - eta.r();
  const double bound = eta.gradient_bound();
  const double d2 = sup_on_unit(smoothstep_d2) / (w * w) + sup_on_unit(smoothstep_d1) / (w * eta.r());
  return check_field(
      grid, [&](const double* y) { return eta.value(y, grid.d); }, 2.0 * grid.h * d2 / bound,
      [&](const double*) { return bound; });
}

GradientCheck check_weight(const Weight& rho, const pde::Grid& grid) {
  grid.validate();
  const double b = rho.beta(), k = rho.kappa();
  const double d2 = 2.0 * b * k + b * (b + 1.0) * k;
  const double lg = rho.log_gradient_bound();
  return check_field(
      grid, [&](const double* y) { return rho.value(y, grid.d); }, 2.0 * grid.h * d2 / lg,
      [&](const double* y) { return lg * rho.value(y, grid.d); });
}

Weight calibrate_weight(double kappa0, double beta, const pde::Grid& grid) {
  double k = kappa0;
  for (int i = 0; i < 60; ++i, k *= 0.5) {
    Weight w(k, beta);
    if (check_weight(w, grid).ok) return w;
  }
  fail(ErrorCode::invalid_parameter, "no kappa passes the weight gradient check");
}

std::vector<double> sample_cutoff(const CutoffFamily& eta, const pde::Grid& grid) {
  std::vector<double> out(grid.node_count());
  double x[simd::kMaxGridDim];
  for (std::size_t i = 0; i < out.size(); ++i) {
    grid.position(i, x);
    out[i] = eta.value(x, grid.d);
  }
  return out;
}

std::vector<double> sample_weight(const Weight& rho, const pde::Grid& grid) {
  std::vector<double> out(grid.node_count());
  double x[simd::kMaxGridDim];
  for (std::size_t i = 0; i < out.size(); ++i) {
    grid.position(i, x);
    out[i] = rho.value(x, grid.d);
  }
  return out;
}

}  // namespace sslab::energy
