#include "sslab/sde/hitting.hpp"

#include <algorithm>
#include <cmath>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sslab/core/parallel.hpp"
#include "sslab/simd/philox.hpp"

namespace sslab::sde {

namespace {

void fill_ci(HittingStats& s) {
  s.p_hat = s.M == 0 ? 0.0 : static_cast<double>(s.hits) / static_cast<double>(s.M);
  s.ci95 = s.M == 0 ? 0.0 : 1.96 * std::sqrt(s.p_hat * (1.0 - s.p_hat) / static_cast<double>(s.M));
}

}  // namespace

HittingStats hitting_probability(const PathEnsemble& ens, double epsilon) {
  require(epsilon > 0.0, ErrorCode::invalid_parameter, "epsilon must be positive");
  HittingStats s;
  s.epsilon = epsilon;
  s.dt = ens.spec.dt;
  s.T = ens.spec.T;
  for (std::size_t i = 0; i < ens.min_radius.size(); ++i) {
    if (ens.excluded[i]) continue;
    ++s.M;
    if (ens.min_radius[i] <= epsilon) ++s.hits;
  }
  fill_ci(s);
  return s;
}

HittingStats hitting_study(const drift::DriftPtr& b, const EnsembleSpec& spec, double epsilon, bool refine) {
  require(epsilon > 0.0, ErrorCode::invalid_parameter, "epsilon must be positive");
  SimulateOptions opt;
  opt.stop_radius = epsilon;
  auto s = hitting_probability(simulate(b, spec, opt), epsilon);
  if (refine) {
    EnsembleSpec half = spec;
    half.dt = spec.dt / 2.0;
    const auto h = hitting_probability(simulate(b, half, opt), epsilon);
    s.p_half_dt = h.p_hat;
    s.ci95_half_dt = h.ci95;
  }
  return s;
}

double radial_coefficient(int d, double delta) {
  return (d - 1.0) - std::sqrt(delta) * (d - 2.0) / 2.0;
}

double bessel_dimension(int d, double delta) { return d - std::sqrt(delta) * (d - 2.0) / 2.0; }

RadialOracle radial_oracle(int d, double delta, double r0, double epsilon, double dt, double T, std::size_t M,
                           std::uint64_t seed, int jobs) {
  require(d >= 3, ErrorCode::invalid_dimension, "radial oracle needs d >= 3");
  require(delta >= 0.0, ErrorCode::invalid_parameter, "delta must be >= 0");
  require(epsilon > 0.0 && r0 > 0.0, ErrorCode::invalid_parameter, "r0 and epsilon must be positive");
  EnsembleSpec grid;
  grid.d = 1;
  grid.dt = dt;
  grid.T = T;
  grid.M = M;
  grid.validate();
  const std::size_t N = grid.steps();
  const double c = radial_coefficient(d, delta);
  const double sigma = std::sqrt(2.0 * dt);
  const auto& kernels = simd::active_kernels();
  const std::size_t blocks = (M + kBlockPaths - 1) / kBlockPaths;
  std::vector<double> y_final(M);
  std::vector<std::uint8_t> absorbed(M);

  parallel_for(blocks, resolve_jobs(jobs), [&](std::size_t blk) {
    const std::size_t first = blk * kBlockPaths;
    const std::size_t count = std::min(kBlockPaths, M - first);
    std::vector<double> y(count, r0), xi(4 * kBlockPaths);
    std::vector<std::uint8_t> dead(count, r0 <= epsilon ? 1 : 0);
    double* planes[4] = {xi.data(), xi.data() + kBlockPaths, xi.data() + 2 * kBlockPaths, xi.data() + 3 * kBlockPaths};
    std::size_t alive = static_cast<std::size_t>(std::count(dead.begin(), dead.end(), 0));
    for (std::size_t k = 0; k < N && alive > 0; ++k) {
      if (k % 4 == 0) kernels.normals4(seed, k / 4, simd::kStreamRadial, first, count, planes);
      const double* z = planes[k % 4];
      for (std::size_t i = 0; i < count; ++i) {
        if (dead[i]) continue;
        y[i] = y[i] + c / y[i] * dt + sigma * z[i];
        if (y[i] <= epsilon) {
          dead[i] = 1;
          --alive;
        }
      }
    }
    for (std::size_t i = 0; i < count; ++i) {
      y_final[first + i] = y[i];
      absorbed[first + i] = dead[i];
    }
  });

  RadialOracle out;
  out.stats.epsilon = epsilon;
  out.stats.dt = dt;
  out.stats.T = T;
  out.stats.M = M;
  for (std::size_t i = 0; i < M; ++i) {
    if (absorbed[i])
      ++out.stats.hits;
    else
      out.survivors.push_back(y_final[i]);
  }
  fill_ci(out.stats);
  return out;
}

std::vector<double> surviving_radii(const PathEnsemble& ens, double epsilon) {
  std::vector<double> r;
  const int d = ens.spec.d;
  for (std::size_t i = 0; i < ens.min_radius.size(); ++i) {
    if (ens.excluded[i] || ens.min_radius[i] <= epsilon) continue;
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += ens.final_x[a][i] * ens.final_x[a][i];
    r.push_back(std::sqrt(r2));
  }
  return r;
}

std::string hitting_csv_header() { return "delta,epsilon,dt,T,M,hits,p_hat,ci95,p_half_dt,ci95_half_dt"; }

std::string hitting_csv_row(double delta, const HittingStats& s) {
  return join(std::vector<std::string>{fmt(delta), fmt(s.epsilon), fmt(s.dt), fmt(s.T), std::to_string(s.M),
                                       std::to_string(s.hits), fmt(s.p_hat), fmt(s.ci95),
                                       s.p_half_dt ? fmt(*s.p_half_dt) : "", s.ci95_half_dt ? fmt(*s.ci95_half_dt) : ""},
              ',');
}

}  // namespace sslab::sde
