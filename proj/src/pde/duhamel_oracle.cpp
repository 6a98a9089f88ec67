#include "sslab/pde/duhamel_oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "sslab/core/error.hpp"
#include "sslab/core/gauss.hpp"

namespace sslab::pde {

namespace {

// (k_sigma * s)(y), k_sigma the 1D heat kernel of variance 2 sigma, by a dense lattice sum.
double convolve(const DuhamelOracle& o, double sigma, double y) {
  const double reach = o.profile_reach;
  const auto m = static_cast<long>(std::ceil(reach / o.lattice_step));
  const double inv = 1.0 / (4.0 * sigma);
  const double norm = o.lattice_step / std::sqrt(4.0 * std::numbers::pi * sigma);
  double acc = 0.0;
  for (long j = -m; j <= m; ++j) {
    const double z = j * o.lattice_step;
    const double dz = y - z;
    acc += std::exp(-dz * dz * inv) * o.profile(z);
  }
  return acc * norm;
}

}  // namespace

double DuhamelOracle::value(double t, const double* x) const {
  if (t <= 0.0) return 0.0;
  const auto& gl = gauss_legendre(time_nodes);
  return amplitude * integrate(gl, 0.0, t, [&](double sigma) {
           double prod = 1.0;
           for (int a = 0; a < d; ++a) prod *= convolve(*this, sigma, x[a] - center[a] - drift[a] * sigma);
           return prod;
         });
}

DuhamelOracle gaussian_oracle(int d, double amp, double sigma, std::array<double, 4> center,
                              std::array<double, 4> drift) {
  DuhamelOracle o;
  o.d = d;
  o.amplitude = amp;
  o.profile = [sigma](double y) { return std::exp(-y * y / (2.0 * sigma * sigma)); };
  o.profile_reach = 10.0 * sigma;
  o.center = center;
  o.drift = drift;
  return o;
}

double gaussian_duhamel_closed_form(int d, double amp, double sigma, const std::array<double, 4>& center,
                                    const std::array<double, 4>& drift, double t, const double* x) {
  auto f = [&](double s) {
    const double var = sigma * sigma + 2.0 * s;
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double y = x[a] - center[a] - drift[a] * s;
      r2 += y * y;
    }
    return std::pow(sigma * sigma / var, 0.5 * d) * std::exp(-r2 / (2.0 * var));
  };
  return amp * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, t, 15, 1e-14);
}

std::vector<double> oracle_on_grid(const DuhamelOracle& o, const Grid& grid, double t) {
  require(o.d == grid.d, ErrorCode::grid_mismatch, "oracle dimension differs from grid");
  const std::size_t n = grid.node_count();
  std::vector<double> out(n, 0.0);
  if (t <= 0.0) return out;
  const auto& gl = gauss_legendre(o.time_nodes);
  const std::size_t m = grid.nodes_per_axis();
  const int d = grid.d;
  // g[j][a][i] = (k_sigma_j * s)(x_i - center_a - c_a sigma_j)
  std::vector<double> g(gl.x.size() * static_cast<std::size_t>(d) * m);
  std::vector<double> w(gl.x.size());
  for (std::size_t j = 0; j < gl.x.size(); ++j) {
    const double sigma = 0.5 * t * (1.0 + gl.x[j]);
    w[j] = 0.5 * t * gl.w[j];
    for (int a = 0; a < d; ++a)
      for (std::size_t i = 0; i < m; ++i)
        g[(j * d + a) * m + i] = convolve(o, sigma, grid.coord(i) - o.center[a] - o.drift[a] * sigma);
  }
  for (std::size_t flat = 0; flat < n; ++flat) {
    const auto idx = grid.multi_index(flat);
    double acc = 0.0;
    for (std::size_t j = 0; j < gl.x.size(); ++j) {
      double prod = w[j];
      for (int a = 0; a < d; ++a) prod *= g[(j * d + a) * m + idx[a]];
      acc += prod;
    }
    out[flat] = o.amplitude * acc;
  }
  return out;
}

double relative_linf_on_ball(const Grid& grid, const std::vector<double>& a, const std::vector<double>& b,
                             double radius) {
  require(a.size() == grid.node_count() && b.size() == grid.node_count(), ErrorCode::grid_mismatch,
          "field sizes differ from grid");
  double err = 0.0, ref = 0.0;
  double x[simd::kMaxGridDim];
  for (std::size_t i = 0; i < a.size(); ++i) {
    grid.position(i, x);
    double r2 = 0.0;
    for (int k = 0; k < grid.d; ++k) r2 += x[k] * x[k];
    if (r2 > radius * radius * (1.0 + 1e-12)) continue;
    err = std::max(err, std::abs(a[i] - b[i]));
    ref = std::max(ref, std::abs(b[i]));
  }
  return ref > 0.0 ? err / ref : err;
}

}  // namespace sslab::pde
