/**
 * @file energy_report.hpp
 * @brief Term-by-term evaluation of the truncated L^p energy inequality on a grid solution.
 *
 * With v = (u - c)_+ and weight w (cutoff eta or rho):
 *   sup <v^p w^2> + int <|grad(w v^{p/2})|^2>
 *     <= C1 <v^p(s) w^2> + C2 int <v^p |grad w|^2> + C3 int <chi(h) 1{v>0} |f|^p w^2>,
 * chi(h) = 1{|h| >= 1} + 1{|h| < 1} |h|^p. The constants follow the absorption recipe
 * for a form bound (delta, g) of b and (nu, g_nu) of h.
 */
#pragma once

#include <string>
#include <variant>
#include <vector>

#include "sslab/drift/drift_field.hpp"
#include "sslab/energy/weights.hpp"
#include "sslab/pde/solver.hpp"

namespace sslab::energy {

/// int |b xi|^2 <= delta int |grad xi|^2 + g int xi^2.
struct FormBound {
  double delta = 0.0;
  double g = 0.0;
};

/// Form bound known from the construction of a catalog field.
FormBound known_form_bound(const drift::DriftField* field);

struct Epsilons {
  double e1 = 0, e2 = 0, e3 = 0, e4 = 0;
};

struct RecipeConstants {
  double C1 = 0, C2 = 0, C3 = 0;
  Epsilons eps;
  double gradient_coefficient = 0;  // A
  double target_coefficient = 0;
  double gamma = 0;                 // Gronwall rate
  int pieces = 1;                   // time-window split
  double C2_local = 0, C3_local = 0;
};

/// `beta2_kappa` > 0 selects the rho-weighted variant (|grad rho| <= beta sqrt(kappa) rho, C2 = 0).
RecipeConstants recipe_constants(double p, const FormBound& b, const FormBound& h, double window,
                                 double beta2_kappa = 0.0);

/// Same recipe at fixed epsilons; A <= 0 raises recipe_failure.
RecipeConstants recipe_at(double p, const FormBound& b, const FormBound& h, double window, const Epsilons& eps,
                          double beta2_kappa = 0.0);

using WeightChoice = std::variant<CutoffFamily, Weight>;

struct EnergyReport {
  double p = 2, c = 0, s = 0, t = 0;
  double lhs_sup = 0, lhs_grad = 0;
  double rhs_initial = 0, rhs_gradweight = 0, rhs_source = 0;
  RecipeConstants constants;
  bool weighted = false;
  bool satisfied = false;

  double lhs() const { return lhs_sup + lhs_grad; }
  double rhs() const;
  std::string explain() const;
};

struct EnergyInputs {
  drift::DriftPtr b;
  pde::SourceSpec src;
  FormBound b_bound;
  FormBound h_bound;
};

/// h = Gaussian bump field of amplitude 4 and width 0.5 along (1,..,1), f = quartic bump of radius 0.75.
pde::SourceSpec standard_source(int d);

/// Window [s, t] snaps to stored frames. Requires p > p_delta and p >= 2.
EnergyReport energy_report(const pde::GridSolution& u, const EnergyInputs& in, double p, double s, double t,
                           double c, const WeightChoice& weight);

struct IdentityResidual {
  double time_term = 0;      // <v^p w^2>(t) - <v^p w^2>(s)
  double diffusion = 0;      // 4(p-1)/p int <|grad v^{p/2}|^2 w^2>
  double cross = 0;          // 4 int <grad v^{p/2}, v^{p/2} w grad w>
  double advection = 0;      // 2 int <b . grad v^{p/2}, v^{p/2} w^2>
  double source = 0;         // p int <|h| f v^{p-1} w^2>
  double residual = 0;       // |sum| / scale
  double scale = 0;
};

/// Discrete balance of the identity obtained by testing the equation with p v^{p-1} w^2.
IdentityResidual energy_identity(const pde::GridSolution& u, const EnergyInputs& in, double p, double s, double t,
                                 double c, const WeightChoice& weight);

std::string energy_csv_header();
std::string energy_csv_row(const EnergyReport& r);

}  // namespace sslab::energy
