/**
 * @file duhamel_oracle.hpp
 * @brief Reference solution of d_t u - Lap u + c . grad u = S(x) on R^d, u(0) = 0.
 *
 * For a separable source S(x) = A prod_a s(x_a) the heat semigroup factorizes:
 * u(t, x) = A int_0^t prod_a (k_sigma * s)(x_a - c_a sigma) d sigma,
 * where k_sigma is the 1D kernel of variance 2 sigma. Each 1D convolution is a
 * dense sum over a fine lattice; the sigma integral is Gauss-Legendre.
 */
#pragma once

#include <array>
#include <functional>

namespace sslab::pde {

struct DuhamelOracle {
  int d = 3;
  double amplitude = 1.0;
  std::function<double(double)> profile;  // s(y), one axis
  double profile_reach = 3.0;              // s vanishes (to double precision) for |y - center| > reach
  std::array<double, 4> center{};
  std::array<double, 4> drift{};           // constant c
  double lattice_step = 2e-3;
  int time_nodes = 48;

  double value(double t, const double* x) const;
};

/// Oracle for S(x) = amp exp(-|x - c|^2 / (2 sigma^2)).
DuhamelOracle gaussian_oracle(int d, double amp, double sigma, std::array<double, 4> center = {},
                              std::array<double, 4> drift = {});

/// Closed form of the same Gaussian problem (for cross-checking the oracle).
double gaussian_duhamel_closed_form(int d, double amp, double sigma, const std::array<double, 4>& center,
                                    const std::array<double, 4>& drift, double t, const double* x);

}  // namespace sslab::pde

#include "sslab/pde/grid.hpp"

namespace sslab::pde {

/// Oracle values at every node of `grid` at time t (separable fast path).
std::vector<double> oracle_on_grid(const DuhamelOracle& oracle, const Grid& grid, double t);

/// max |a - b| / max |b| over nodes with |x| <= radius.
double relative_linf_on_ball(const Grid& grid, const std::vector<double>& a, const std::vector<double>& b,
                             double radius);

}  // namespace sslab::pde
