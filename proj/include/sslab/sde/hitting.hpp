#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sslab/sde/engine.hpp"

namespace sslab::sde {

struct HittingStats {
  double epsilon = 0.0;
  double p_hat = 0.0;
  double ci95 = 0.0;  // 1.96 sqrt(p (1 - p) / M)
  std::size_t M = 0;
  std::size_t hits = 0;
  double dt = 0.0;
  double T = 0.0;
  std::optional<double> p_half_dt;  // same seed at dt / 2
  std::optional<double> ci95_half_dt;
};

HittingStats hitting_probability(const PathEnsemble& ens, double epsilon);

/// Full-dimensional estimate from x0, optionally repeated at dt/2.
HittingStats hitting_study(const drift::DriftPtr& b, const EnsembleSpec& spec, double epsilon, bool refine);

/// (d - 1) - sqrt(delta) (d - 2) / 2: the radial drift coefficient of |X| times |X|.
double radial_coefficient(int d, double delta);
/// d - sqrt(delta) (d - 2) / 2
double bessel_dimension(int d, double delta);

struct RadialOracle {
  HittingStats stats;
  std::vector<double> survivors;  // Y_T of paths never within epsilon
};

/// dY = sqrt(2) dW + radial_coefficient / Y dt, absorbed at epsilon.
RadialOracle radial_oracle(int d, double delta, double r0, double epsilon, double dt, double T, std::size_t M,
                           std::uint64_t seed, int jobs = 0);

/// |X_T| of paths whose minimum radius stayed above epsilon.
std::vector<double> surviving_radii(const PathEnsemble& ens, double epsilon);

std::string hitting_csv_header();
std::string hitting_csv_row(double delta, const HittingStats& s);

}  // namespace sslab::sde
