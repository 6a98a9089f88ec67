#include <cmath>
#include <cstring>

#include "sslab/simd/fastmath.hpp"
#include "sslab/simd/kernels.hpp"
#include "sslab/simd/philox.hpp"

namespace sslab::simd {

namespace fm = fastmath;

double radial_table_eval(const RadialTableView& table, double r) {
  if (!(r < table.r_max)) return 0.0;
  const double q = r / table.width;
  const double k = static_cast<double>(table.nodes_per_zone);
  double pos = 0.0;
  std::int64_t zone = 0;
  if (q < 1.0) {
    pos = q * k;
  } else {
    const auto bits = std::bit_cast<std::uint64_t>(q);
    zone = static_cast<std::int64_t>((bits >> 52) & 0x7ffu) - 1023 + 1;
    if (!(zone < table.zones)) return 0.0;
    const double m = std::bit_cast<double>((bits & 0x000fffffffffffffULL) | 0x3ff0000000000000ULL);
    pos = (m - 1.0) * k;
  }
  if (!(q == q)) return 0.0;
  double fl = std::floor(pos);
  if (fl > k - 1.0) fl = k - 1.0;
  const double frac = pos - fl;
  const std::int64_t idx = zone * (table.nodes_per_zone + 1) + static_cast<std::int64_t>(fl);
  const double v0 = table.values[idx];
  const double v1 = table.values[idx + 1];
  return v0 + frac * (v1 - v0);
}

namespace {

void philox_scalar(const std::uint32_t* const* ctr, std::uint32_t key0, std::uint32_t key1, std::size_t count,
                   std::uint32_t* const* out) {
  for (std::size_t i = 0; i < count; ++i) {
    const auto r = philox4x32_10({ctr[0][i], ctr[1][i], ctr[2][i], ctr[3][i]}, key0, key1);
    for (int w = 0; w < 4; ++w) out[w][i] = r[static_cast<std::size_t>(w)];
  }
}

inline void normals_for_path(std::uint64_t seed, std::uint64_t step, std::uint32_t word1, std::uint64_t path,
                             double out[4]) {
  const auto words = philox4x32_10({static_cast<std::uint32_t>(step), word1, static_cast<std::uint32_t>(path),
                                    static_cast<std::uint32_t>(path >> 32)},
                                   static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32));
  fm::box_muller(words[0], words[1], out[0], out[1]);
  fm::box_muller(words[2], words[3], out[2], out[3]);
}

void normals4_scalar(std::uint64_t seed, std::uint64_t step, std::uint32_t word1, std::uint64_t first_path,
                     std::size_t count, double* const* out) {
  for (std::size_t i = 0; i < count; ++i) {
    double n[4];
    normals_for_path(seed, step, word1, first_path + i, n);
    for (int w = 0; w < 4; ++w) out[w][i] = n[w];
  }
}

void radial_drift_scalar(const RadialTableView& table, double time_factor, int d, std::size_t count,
                         const double* const* x, double* const* b) {
  for (std::size_t i = 0; i < count; ++i) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 = r2 + x[a][i] * x[a][i];
    const double r = std::sqrt(r2);
    const double psi = radial_table_eval(table, r);
    const double factor = r > 0.0 ? (time_factor * psi) / r : 0.0;
    for (int a = 0; a < d; ++a) b[a][i] = factor * x[a][i];
  }
}

void em_step_scalar(const EmStepArgs& s) {
  const double sigma = std::sqrt(2.0 * s.dt);
  const double cap2 = s.max_displacement * s.max_displacement;
  const int blocks = (s.d + 3) / 4;
  for (std::size_t i = 0; i < s.count; ++i) {
    double xi[kMaxPathDim + 4];
    for (int blk = 0; blk < blocks; ++blk)
      normals_for_path(s.seed, s.step, kStreamEuler | static_cast<std::uint32_t>(blk), s.first_path + i,
                       xi + 4 * blk);
    double delta[kMaxPathDim];
    double norm2 = 0.0;
    for (int a = 0; a < s.d; ++a) {
      delta[a] = sigma * xi[a] - s.drift[a][i] * s.dt;
      norm2 = norm2 + delta[a] * delta[a];
    }
    if (norm2 > cap2) {
      const double scale = s.max_displacement / std::sqrt(norm2);
      for (int a = 0; a < s.d; ++a) delta[a] = delta[a] * scale;
      s.capped[i] += 1;
    }
    double r2 = 0.0;
    for (int a = 0; a < s.d; ++a) {
      const double v = s.x[a][i] + delta[a];
      s.x[a][i] = v;
      r2 = r2 + v * v;
    }
    const double r = std::sqrt(r2);
    s.min_radius[i] = r < s.min_radius[i] ? r : s.min_radius[i];
    if (!(r2 < INFINITY)) s.nonfinite[i] = 1;
  }
}

void stencil_apply_scalar(const StencilView& op, const double* u, double* y) {
  for (std::size_t i = 0; i < op.n; ++i) {
    double acc = op.diag[i] * u[i];
    for (int a = 0; a < op.d; ++a) {
      acc = acc + op.lower[a][i] * u[static_cast<std::ptrdiff_t>(i) - op.stride[a]];
      acc = acc + op.upper[a][i] * u[static_cast<std::ptrdiff_t>(i) + op.stride[a]];
    }
    y[i] = acc;
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) lane[i & 3u] = lane[i & 3u] + a[i] * b[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void xpby_scalar(const double* x, double beta, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

double translate_weighted_sum_scalar(const PointCloudView& pts, const double* z, double kappa, int power) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < pts.n; ++i) {
    double dist2 = 0.0;
    for (int a = 0; a < pts.d; ++a) {
      const double diff = pts.coord[static_cast<std::size_t>(a)][i] - z[a];
      dist2 = dist2 + diff * diff;
    }
    const double q = 1.0 + kappa * dist2;
    double qk = 1.0;
    if (power > 0) {
      qk = q;
      for (int p = 1; p < power; ++p) qk = qk * q;
    }
    lane[i & 3u] = lane[i & 3u] + pts.value[i] / qk;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::scalar,          philox_scalar,  normals4_scalar,
                                 radial_drift_scalar,  em_step_scalar, stencil_apply_scalar,
                                 dot_scalar,           axpy_scalar,    xpby_scalar,
                                 mul_scalar,           translate_weighted_sum_scalar};
  return table;
}

}  // namespace sslab::simd
