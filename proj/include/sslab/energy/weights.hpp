/**
 * @file weights.hpp
 * @brief Compactly supported cutoffs eta_{r,R} and the algebraic weight rho.
 */
#pragma once

#include <array>
#include <vector>

#include "sslab/pde/grid.hpp"

namespace sslab::energy {

/// eta = S(s), s = clamp((R - |x|) / (R - r), 0, 1), S the quintic smoothstep.
class CutoffFamily {
 public:
  CutoffFamily(double r, double R);

  double r() const noexcept { return r_; }
  double R() const noexcept { return R_; }
  /// sup |S'| * 4, so that |grad eta| <= (c0 / 4) / (R - r).
  static double c0();

  double value(const double* x, int d) const;
  void gradient(const double* x, int d, double* g) const;
  double gradient_bound() const { return 0.25 * c0() / (R_ - r_); }

 private:
  double r_, R_;
};

/// rho = (1 + kappa |x|^2)^{-beta}.
class Weight {
 public:
  Weight(double kappa, double beta, std::array<double, 4> center = {});
  static Weight standard(int d);

  double kappa() const noexcept { return kappa_; }
  double beta() const noexcept { return beta_; }

  double value(const double* x, int d) const;
  void gradient(const double* x, int d, double* g) const;
  /// beta sqrt(kappa)
  double log_gradient_bound() const;

 private:
  double kappa_, beta_;
  std::array<double, 4> center_;
};

struct GradientCheck {
  double max_ratio = 0.0;  // max |grad_h w| / bound
  double tolerance = 0.0;
  bool ok = false;
};

/// Central-difference gradient against |grad eta| <= (c0/4)/(R - r) at every interior node.
GradientCheck check_cutoff(const CutoffFamily& eta, const pde::Grid& grid);
/// Central-difference gradient against beta sqrt(kappa) rho (1 + tol), tol = 2 h sup|D^2 rho / rho|.
GradientCheck check_weight(const Weight& rho, const pde::Grid& grid);

/// Largest kappa <= kappa0 (halving) for which check_weight passes.
Weight calibrate_weight(double kappa0, double beta, const pde::Grid& grid);

std::vector<double> sample_cutoff(const CutoffFamily& eta, const pde::Grid& grid);
std::vector<double> sample_weight(const Weight& rho, const pde::Grid& grid);

}  // namespace sslab::energy
