#include "sslab/drift/drift_field.hpp"

#include <cmath>
#include <numbers>

#include "sslab/core/error.hpp"
#include "sslab/core/gauss.hpp"
#include "sslab/simd/kernels.hpp"

namespace sslab::drift {

std::string to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::inverse_square: return "inverse_square";
    case DriftKind::bounded_smooth: return "bounded_smooth";
    case DriftKind::lps_power: return "lps_power";
    case DriftKind::mollified: return "mollified";
    case DriftKind::difference: return "difference";
  }
  return "unknown";
}

DriftField::DriftField(DriftKind kind, int d, std::vector<double> params, bool time_dependent,
                       std::optional<double> support_radius)
    : kind_(kind), d_(d), params_(std::move(params)), time_dependent_(time_dependent), support_radius_(support_radius) {
  require(d >= 3, ErrorCode::invalid_dimension, "dimension must be >= 3, got " + std::to_string(d));
  require(d <= simd::kMaxPathDim, ErrorCode::invalid_dimension, "dimension above " +
                                                                    std::to_string(simd::kMaxPathDim));
}

void DriftField::eval_block(double t, std::size_t count, const double* const* x, double* const* out) const {
  double xi[simd::kMaxPathDim];
  double bi[simd::kMaxPathDim];
  for (std::size_t i = 0; i < count; ++i) {
    for (int a = 0; a < d_; ++a) xi[a] = x[a][i];
    eval(t, xi, bi);
    for (int a = 0; a < d_; ++a) out[a][i] = bi[a];
  }
}

double DriftField::magnitude(double t, const double* x) const {
  double b[simd::kMaxPathDim];
  eval(t, x, b);
  double s = 0.0;
  for (int a = 0; a < d_; ++a) s += b[a] * b[a];
  return std::sqrt(s);
}

double DriftField::sphere_mean_square(double t, double r) const {
  switch (symmetry()) {
    case Symmetry::vector_radial: {
      const double f = radial_profile(t, r);
      return f * f;
    }
    case Symmetry::scalar_radial: {
      const double f = radial_profile(t, r);
      const auto v = direction();
      double v2 = 0.0;
      for (int a = 0; a < d_; ++a) v2 += v[a] * v[a];
      return f * f * v2;
    }
    case Symmetry::none: break;
  }
  double x[simd::kMaxPathDim] = {};
  double acc = 0.0;
  if (d_ == 3) {
    const auto& gl = gauss_legendre(16);
    const int nphi = 32;
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
      const double z = gl.x[i];
      const double rho = std::sqrt(1.0 - z * z);
      for (int j = 0; j < nphi; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / nphi;
        x[0] = r * rho * std::cos(phi);
        x[1] = r * rho * std::sin(phi);
        x[2] = r * z;
        const double m = magnitude(t, x);
        acc += gl.w[i] * m * m / (2.0 * nphi);
      }
    }
    return acc;
  }
  // Signed coordinate directions and diagonals: a symmetric design exact for quadratics.
  int count = 0;
  for (int a = 0; a < d_; ++a)
    for (int s = -1; s <= 1; s += 2) {
      for (int c = 0; c < d_; ++c) x[c] = 0.0;
      x[a] = s * r;
      const double m = magnitude(t, x);
      acc += m * m;
      ++count;
    }
  for (int mask = 0; mask < (1 << d_); ++mask) {
    for (int c = 0; c < d_; ++c) x[c] = ((mask >> c) & 1 ? -r : r) / std::sqrt(static_cast<double>(d_));
    const double m = magnitude(t, x);
    acc += m * m;
    ++count;
  }
  return acc / count;
}

double unit_sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace sslab::drift
