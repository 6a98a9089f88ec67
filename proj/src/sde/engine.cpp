#include "sslab/sde/engine.hpp"

#include <algorithm>
#include <cmath>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sslab/core/parallel.hpp"

namespace sslab::sde {

std::size_t EnsembleSpec::steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

double EnsembleSpec::x0_radius() const {
  double r2 = 0.0;
  for (int a = 0; a < d; ++a) r2 += x0[a] * x0[a];
  return std::sqrt(r2);
}

void EnsembleSpec::validate() const {
  require(d >= 1 && d <= simd::kMaxPathDim, ErrorCode::invalid_dimension,
          "path dimension must be in [1, " + std::to_string(simd::kMaxPathDim) + "], got " + std::to_string(d));
  require(dt > 0.0 && std::isfinite(dt), ErrorCode::invalid_parameter, "dt must be positive");
  require(T > 0.0 && std::isfinite(T), ErrorCode::invalid_parameter, "T must be positive");
  require(M > 0, ErrorCode::invalid_parameter, "M must be positive");
  require(cap_factor > 0.0, ErrorCode::invalid_parameter, "cap factor must be positive");
  const double n = T / dt;
  require(std::abs(n - std::round(n)) <= 1e-9 * std::max(1.0, n), ErrorCode::grid_mismatch,
          "T / dt must be an integer, got " + fmt(n));
  for (int a = 0; a < d; ++a) require(std::isfinite(x0[a]), ErrorCode::invalid_parameter, "x0 must be finite");
}

double PathEnsemble::cap_fraction() const {
  return total_steps == 0 ? 0.0 : static_cast<double>(capped_steps) / static_cast<double>(total_steps);
}

std::size_t step_index(const EnsembleSpec& spec, double t) {
  const double k = t / spec.dt;
  require(t >= 0.0 && t <= spec.T * (1.0 + 1e-12), ErrorCode::out_of_range,
          "time " + fmt(t) + " outside [0, " + fmt(spec.T) + "]");
  require(std::abs(k - std::round(k)) <= 1e-9 * std::max(1.0, k), ErrorCode::grid_mismatch,
          "time " + fmt(t) + " is not a multiple of dt");
  return static_cast<std::size_t>(std::llround(k));
}

PathEnsemble simulate(const drift::DriftPtr& b, const EnsembleSpec& spec, const SimulateOptions& options) {
  spec.validate();
  if (b) require(b->d() == spec.d, ErrorCode::invalid_dimension, "drift dimension does not match the paths");
  const auto& kernels = simd::active_kernels();
  const std::size_t N = spec.steps();
  const int d = spec.d;
  const std::size_t blocks = (spec.M + kBlockPaths - 1) / kBlockPaths;

  PathEnsemble ens;
  ens.spec = spec;
  ens.drift_id = b ? b->id() : "zero";
  ens.final_x.assign(static_cast<std::size_t>(d), std::vector<double>(spec.M));
  ens.min_radius.assign(spec.M, 0.0);
  ens.excluded.assign(spec.M, 0);
  std::vector<std::uint64_t> block_capped(blocks, 0), block_steps(blocks, 0);
  for (auto* obs : options.observers) obs->prepare(spec);
  const bool may_stop = options.stop_radius.has_value() && options.observers.empty();
  const double r0 = spec.x0_radius();
  const double max_disp = spec.cap_factor * std::sqrt(2.0 * spec.dt);

  parallel_for(blocks, resolve_jobs(spec.jobs), [&](std::size_t blk) {
    const std::size_t first = blk * kBlockPaths;
    const std::size_t count = std::min(kBlockPaths, spec.M - first);
    std::vector<double> xs(static_cast<std::size_t>(d) * kBlockPaths), bs(static_cast<std::size_t>(d) * kBlockPaths, 0.0);
    double* xp[simd::kMaxPathDim];
    double* bp[simd::kMaxPathDim];
    for (int a = 0; a < d; ++a) {
      xp[a] = xs.data() + static_cast<std::size_t>(a) * kBlockPaths;
      bp[a] = bs.data() + static_cast<std::size_t>(a) * kBlockPaths;
      std::fill(xp[a], xp[a] + count, spec.x0[a]);
    }
    std::vector<double> min_r(count, r0);
    std::vector<std::uint32_t> capped(count, 0);
    std::vector<std::uint8_t> bad(count, 0);

    simd::EmStepArgs args;
    args.d = d;
    args.count = count;
    args.x = xp;
    args.drift = bp;
    args.dt = spec.dt;
    args.max_displacement = max_disp;
    args.seed = spec.seed;
    args.first_path = first;
    args.min_radius = min_r.data();
    args.capped = capped.data();
    args.nonfinite = bad.data();

    std::uint64_t taken = 0;
    for (std::size_t k = 0; k <= N; ++k) {
      const double t = static_cast<double>(k) * spec.dt;
      if (b) b->eval_block(t, count, xp, bp);
      if (!options.observers.empty()) {
        StepView view{k, t, spec.dt, d, first, count, xp, bp};
        for (auto* obs : options.observers) obs->observe(view);
      }
      if (k == N) break;
      if (may_stop && std::all_of(min_r.begin(), min_r.end(), [&](double r) { return r <= *options.stop_radius; }))
        break;
      args.step = k;
      kernels.em_step(args);
      ++taken;
    }

    std::uint64_t cap_sum = 0;
    for (std::size_t i = 0; i < count; ++i) {
      for (int a = 0; a < d; ++a) ens.final_x[a][first + i] = xp[a][i];
      ens.min_radius[first + i] = min_r[i];
      ens.excluded[first + i] = bad[i];
      cap_sum += capped[i];
    }
    block_capped[blk] = cap_sum;
    block_steps[blk] = taken * count;
  });

  for (std::size_t blk = 0; blk < blocks; ++blk) {
    ens.capped_steps += block_capped[blk];
    ens.total_steps += block_steps[blk];
  }
  ens.nonfinite = static_cast<std::size_t>(std::count(ens.excluded.begin(), ens.excluded.end(), 1));
  return ens;
}

}  // namespace sslab::sde
