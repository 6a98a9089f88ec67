/**
 * @file kernels.hpp
 * @brief Data-parallel inner loops with a scalar reference and an AVX2 variant.
 *
 * Every kernel exists twice with the same sequence of IEEE operations, so the
 * AVX2 table reproduces the scalar table bit for bit. The active table is
 * chosen once at startup from the CPU features (override with SSLAB_SIMD).
 */
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>

namespace sslab::simd {

inline constexpr int kMaxPathDim = 8;
inline constexpr int kMaxGridDim = 4;

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Radial profile psi(r) sampled on octave zones: zone 0 covers [0, w), zone z >= 1
/// covers [w 2^(z-1), w 2^z). Each zone stores `nodes_per_zone + 1` samples.
/// Beyond the last zone, and at r >= r_max, the profile is zero.
struct RadialTableView {
  const double* values = nullptr;
  double width = 1.0;
  int nodes_per_zone = 0;
  int zones = 0;
  double r_max = std::numeric_limits<double>::infinity();
};

/// One Euler-Maruyama step X <- X - b dt + sqrt(2 dt) xi for a block of paths.
struct EmStepArgs {
  int d = 0;
  std::size_t count = 0;
  double* const* x = nullptr;        // d pointers, count entries each (in/out)
  const double* const* drift = nullptr;  // d pointers, b(t_k, X_k)
  double dt = 0.0;
  double max_displacement = 0.0;     // per-step cap on |dX|
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::uint64_t first_path = 0;
  double* min_radius = nullptr;      // running min |X| (in/out)
  std::uint32_t* capped = nullptr;   // cap activations (in/out)
  std::uint8_t* nonfinite = nullptr; // set to 1 once a coordinate is not finite
};

/// Advection-diffusion stencil y = diag*u + sum_a lower_a*u[i-s_a] + upper_a*u[i+s_a].
/// `u` must be readable at offsets [-max stride, n + max stride).
struct StencilView {
  int d = 0;
  std::size_t n = 0;
  std::array<std::ptrdiff_t, kMaxGridDim> stride{};
  const double* diag = nullptr;
  std::array<const double*, kMaxGridDim> lower{};
  std::array<const double*, kMaxGridDim> upper{};
};

/// Points for translate-weighted quadrature sums.
struct PointCloudView {
  int d = 0;
  std::size_t n = 0;
  std::array<const double*, kMaxGridDim> coord{};
  const double* value = nullptr;  // quadrature weight times integrand
};

struct KernelTable {
  Isa isa;
  /// Philox4x32-10 applied to `count` counters stored as 4 planes.
  void (*philox)(const std::uint32_t* const* ctr_planes, std::uint32_t key0, std::uint32_t key1,
                 std::size_t count, std::uint32_t* const* out_planes);
  /// Four standard normals per path from counter (step, word1, path), written as 4 planes.
  void (*normals4)(std::uint64_t seed, std::uint64_t step, std::uint32_t word1, std::uint64_t first_path,
                   std::size_t count, double* const* out_planes);
  /// b(x) = time_factor * psi(|x|) x / |x| for radial fields.
  void (*radial_drift)(const RadialTableView& table, double time_factor, int d, std::size_t count,
                       const double* const* x, double* const* b);
  void (*em_step)(const EmStepArgs& args);
  void (*stencil_apply)(const StencilView& op, const double* u, double* y);
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y += alpha x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y = x + beta y
  void (*xpby)(const double* x, double beta, double* y, std::size_t n);
  /// out = a * b elementwise
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  /// sum_i value_i / (1 + kappa |x_i - z|^2)^power
  double (*translate_weighted_sum)(const PointCloudView& pts, const double* z, double kappa, int power);
};

const KernelTable& scalar_kernels();
/// Null when the binary or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();
bool cpu_has_avx2();
/// Table selected at startup (SSLAB_SIMD=scalar|avx2 overrides detection).
const KernelTable& active_kernels();

/// Psi lookup shared by scalar code paths outside the kernels.
double radial_table_eval(const RadialTableView& table, double r);

}  // namespace sslab::simd
