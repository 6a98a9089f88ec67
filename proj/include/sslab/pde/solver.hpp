/**
 * @file solver.hpp
 * @brief Finite differences for d_t u - Lap u + b . grad u = |h| f and its terminal-value twin.
 *
 * Centered diffusion, first-order upwind advection and implicit Euler give an
 * M-matrix per step; systems are solved with Jacobi-preconditioned BiCGSTAB.
 */
#pragma once

#include <functional>

#include "sslab/drift/drift_field.hpp"
#include "sslab/pde/grid.hpp"
#include "sslab/pde/scalar_function.hpp"

namespace sslab::pde {

/// Right-hand side |h(t, x)| f(t, x).
struct SourceSpec {
  drift::DriftPtr h_field;
  ScalarPtr f;

  double value(double t, const double* x) const;
  bool is_zero() const;
  void validate(const Grid& grid) const;
};

struct SolveOptions {
  std::size_t save_every = 1;
  double rel_tol = 1e-12;
  int max_iter = 500;
  ScalarPtr initial;          // u(0); zero when null
  double peclet_limit = 1.0;  // warn when max |b| h / 2 exceeds this
};

GridSolution solve_cauchy(const drift::DriftPtr& b, const SourceSpec& src, const Grid& grid,
                          const SolveOptions& options = {});

/// d_t u + Lap u + b . grad u + F = 0 on [t1 - T, t1], u(t1) = 0. Frames are stored in increasing t.
GridSolution solve_terminal(const drift::DriftPtr& b, const ScalarPtr& F, const Grid& grid, double t1,
                            const SolveOptions& options = {});

/// Discrete L^2([0,T] x box) norm of the implicit-Euler residual at interior nodes.
double residual_norm(const GridSolution& sol, const drift::DriftPtr& b, const SourceSpec& src);

/// Samples b on the grid (d planes of node_count entries); null b gives zeros.
std::vector<std::vector<double>> sample_drift(const drift::DriftPtr& b, const Grid& grid, double t);
std::vector<double> sample_source(const SourceSpec& src, const Grid& grid, double t);
std::vector<double> sample_function(const ScalarFunction& f, const Grid& grid, double t);

}  // namespace sslab::pde
