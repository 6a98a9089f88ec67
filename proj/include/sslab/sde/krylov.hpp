/**
 * @file krylov.hpp
 * @brief Occupation integrals E int |h(s, X_s)| f(s, X_s) ds against their space-time bound.
 */
#pragma once

#include <string>
#include <vector>

#include "sslab/energy/weights.hpp"
#include "sslab/pde/scalar_function.hpp"
#include "sslab/sde/engine.hpp"
#include "sslab/sde/stats.hpp"

namespace sslab::sde {

struct TimeWindow {
  double t0 = 0.0, t1 = 0.0;
};

/// Per-path int_{t0}^{t1} |h| f ds for several windows (left-point rule).
class OccupationObserver final : public PathObserver {
 public:
  /// Null `h` uses the simulated drift; null `f` means f = 1.
  OccupationObserver(drift::DriftPtr h, pde::ScalarPtr f, std::vector<TimeWindow> windows);
  void prepare(const EnsembleSpec& spec) override;
  void observe(const StepView& view) override;
  MeanStat window_mean(std::size_t w, const std::vector<std::uint8_t>& excluded) const;
  const std::vector<TimeWindow>& windows() const { return windows_; }

 private:
  drift::DriftPtr h_;
  pde::ScalarPtr f_;
  std::vector<TimeWindow> windows_;
  std::vector<std::size_t> k0_, k1_;
  std::vector<std::vector<double>> acc_;
};

struct KrylovGrid {
  double L = 2.0;
  double h = 0.05;
  int time_nodes = 4;
};

/// sup_z (int_{t0}^{t1} <chi(h)^{theta'} |f|^{p theta'} rho_z^2>)^{1/(p theta')}, z in Z^d within the box.
double krylov_rhs(const drift::DriftPtr& h, const pde::ScalarPtr& f, int d, double p, double theta, TimeWindow w,
                  const energy::Weight& rho, const KrylovGrid& grid = {});

struct KrylovPair {
  double t0 = 0.0, t1 = 0.0;
  double lhs = 0.0, lhs_stderr = 0.0;
  double rhs = 0.0;
  double fitted_C = 0.0;
  bool degenerate = false;
};

/// `h` null means h = b.
std::vector<KrylovPair> krylov_statistic(const drift::DriftPtr& b, const EnsembleSpec& spec,
                                         const drift::DriftPtr& h, const pde::ScalarPtr& f, double p, double theta,
                                         const std::vector<TimeWindow>& windows, const energy::Weight& rho,
                                         const KrylovGrid& grid = {});

struct ScalingResult {
  std::vector<TimeWindow> windows;
  std::vector<double> lhs;
  PowerFit fit;
};

/// Regression of E int_{t0}^{t1} |b(X_s)| ds on t1 - t0.
ScalingResult drift_integral_scaling(const drift::DriftPtr& b, const EnsembleSpec& spec,
                                     const std::vector<TimeWindow>& windows);

std::string krylov_csv_header();
std::string krylov_csv_row(const KrylovPair& k);

}  // namespace sslab::sde
