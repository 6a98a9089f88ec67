/**
 * @file engine.hpp
 * @brief Euler-Maruyama paths for dX = -b(t, X) dt + sqrt(2) dB.
 *
 * Paths are simulated in blocks of 256 with one counter-based normal stream per
 * (seed, step, path), so results do not depend on the worker count. Observers see
 * every block at every step k = 0..N together with b(t_k, X_k).
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sslab/drift/drift_field.hpp"
#include "sslab/simd/kernels.hpp"

namespace sslab::sde {

inline constexpr std::size_t kBlockPaths = 256;

struct EnsembleSpec {
  int d = 3;
  std::array<double, simd::kMaxPathDim> x0{};
  double dt = 1e-3;
  double T = 1.0;
  std::size_t M = 1000;
  std::uint64_t seed = 1;
  int jobs = 0;
  double cap_factor = 10.0;  // displacement cap in units of sqrt(2 dt)

  std::size_t steps() const;
  double x0_radius() const;
  void validate() const;
};

struct StepView {
  std::size_t step = 0;
  double t = 0.0;
  double dt = 0.0;
  int d = 0;
  std::size_t first_path = 0;
  std::size_t count = 0;
  const double* const* x = nullptr;
  const double* const* drift = nullptr;
};

class PathObserver {
 public:
  virtual ~PathObserver() = default;
  virtual void prepare(const EnsembleSpec& spec) = 0;
  /// Blocks cover disjoint path ranges and may arrive concurrently.
  virtual void observe(const StepView& view) = 0;
};

struct SimulateOptions {
  std::vector<PathObserver*> observers;
  /// Stop a block once every path has come within this radius (ignored with observers).
  std::optional<double> stop_radius;
};

struct PathEnsemble {
  EnsembleSpec spec;
  std::string drift_id;
  std::vector<std::vector<double>> final_x;  // d planes of M
  std::vector<double> min_radius;
  std::vector<std::uint8_t> excluded;
  std::size_t nonfinite = 0;
  std::uint64_t capped_steps = 0;
  std::uint64_t total_steps = 0;

  double cap_fraction() const;
  std::size_t valid_paths() const { return spec.M - nonfinite; }
};

PathEnsemble simulate(const drift::DriftPtr& b, const EnsembleSpec& spec, const SimulateOptions& options = {});

/// Index of the step nearest to t, checked to lie on the step grid.
std::size_t step_index(const EnsembleSpec& spec, double t);

}  // namespace sslab::sde
