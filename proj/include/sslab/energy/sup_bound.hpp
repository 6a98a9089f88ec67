#pragma once

#include <string>

#include "sslab/energy/weights.hpp"
#include "sslab/pde/solver.hpp"

namespace sslab::energy {

enum class SupMode { local_ball, weighted_global };

struct SupBoundReport {
  SupMode mode = SupMode::local_ball;
  double p = 2, theta = 1.25, theta_prime = 5;
  double lhs = 0;
  double source_term = 0;   // 2 H^{1/(p theta')} (local) or sup_z (...)^{1/(p theta')} (global)
  double u_term = 0;        // U^{1/p}, local only
  double implied_K = 0;     // (lhs - source_term)_+ / u_term
  double implied_C = 0;     // lhs / (source_term + u_term)
  double rhs = 0;           // source_term + implied_K u_term

  double implied_constant() const { return implied_C; }
};

double default_theta(int d);

/// theta in (1, d/(d-1)); the grid must contain B(0,1).
SupBoundReport sup_bound_check(const pde::GridSolution& u, const pde::SourceSpec& src, double p, double theta,
                               SupMode mode, const Weight& rho = Weight::standard(3));

/// int_0^T <chi(h)^{q} |f|^{p q} w> with chi(h) = 1{|h| >= 1} + 1{|h| < 1} |h|^p, q = theta'.
double source_norm_integral(const pde::SourceSpec& src, const pde::Grid& grid, double T, double p, double q,
                            const std::vector<double>& w);

std::string to_string(SupMode mode);
std::string sup_csv_header();
std::string sup_csv_row(const SupBoundReport& r);

}  // namespace sslab::energy
