#pragma once

#include <string>
#include <vector>

#include "sslab/pde/scalar_function.hpp"
#include "sslab/sde/engine.hpp"

namespace sslab::sde {

/// Bounded functionals of the path on [0, t0].
enum class GFunctional { one, clip_phi, clip_mean };

std::string to_string(GFunctional g);
GFunctional g_from_string(const std::string& s);

struct MartingaleDefect {
  std::string phi;
  double t0 = 0.0, t1 = 0.0;
  GFunctional g = GFunctional::one;
  double defect = 0.0;
  double stderr_ = 0.0;
  std::size_t M = 0;
};

/// Accumulates M_t = phi(X_t) - phi(X_0) + int_0^t (-Lap phi + b . grad phi)(X_s) ds by the left-point rule.
class MartingaleObserver final : public PathObserver {
 public:
  /// `b_eval` null uses the simulated drift.
  MartingaleObserver(pde::ScalarPtr phi, double t0, double t1, GFunctional g, drift::DriftPtr b_eval = nullptr);
  void prepare(const EnsembleSpec& spec) override;
  void observe(const StepView& view) override;
  MartingaleDefect result(const std::vector<std::uint8_t>& excluded) const;

 private:
  pde::ScalarPtr phi_;
  double t0_, t1_;
  GFunctional g_;
  drift::DriftPtr b_eval_;
  std::size_t k0_ = 0, k1_ = 0;
  std::vector<double> phi0_, integral_, m0_, m1_, gval_, mean_x_;
};

MartingaleDefect martingale_defect(const drift::DriftPtr& b, const EnsembleSpec& spec, const pde::ScalarPtr& phi,
                                   double t0, double t1, GFunctional g, const drift::DriftPtr& b_eval = nullptr);

std::string defect_csv_header();
std::string defect_csv_row(const MartingaleDefect& m, int n);

}  // namespace sslab::sde
