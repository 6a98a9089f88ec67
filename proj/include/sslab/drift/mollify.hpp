#pragma once

#include <vector>

#include "sslab/drift/drift_field.hpp"
#include "sslab/simd/kernels.hpp"

namespace sslab::drift {

/// Truncate b by 1{|t| <= time_cap, |x| <= space_cap, |b| <= value_cap}, then
/// convolve in (t, x) with the normalized bump (1 - |y|^2)^4 of radius `width`.
struct MollificationSchedule {
  int n = 1;
  double time_cap = 1.0;
  double space_cap = 1.0;
  double value_cap = 1.0;
  double width = 1.0;

  /// All caps equal to n, width 1/n.
  static MollificationSchedule standard(int n);
  void validate() const;
};

struct MollifyOptions {
  int nodes_per_zone = 64;
  int gauss_order = 20;
};

/// Smooth, bounded, compactly supported approximation of a symmetric field.
/// Fields without radial symmetry are rejected with invalid-parameter.
DriftPtr mollify(DriftPtr field, const MollificationSchedule& schedule, const MollifyOptions& options = {});

/// Time factor of the mollified indicator 1{|t| <= cap}.
double time_factor(double t, double cap, double width);

/// Spatial mollified field; exposed for direct table access by the SDE engine.
class MollifiedField final : public DriftField {
 public:
  MollifiedField(DriftPtr inner, const MollificationSchedule& schedule, const MollifyOptions& options);

  void eval(double t, const double* x, double* out) const override;
  void eval_block(double t, std::size_t count, const double* const* x, double* const* out) const override;
  std::string id() const override;
  std::optional<double> sup_bound() const override;
  Symmetry symmetry() const override { return inner_->symmetry(); }
  double radial_profile(double t, double r) const override;
  std::array<double, 8> direction() const override { return inner_->direction(); }
  double sphere_mean_square(double t, double r) const override;

  const DriftField& inner() const { return *inner_; }
  const MollificationSchedule& schedule() const { return schedule_; }
  simd::RadialTableView table() const;
  double time_factor_at(double t) const;

 private:
  DriftPtr inner_;
  MollificationSchedule schedule_;
  std::vector<double> values_;
  int nodes_per_zone_;
  int zones_;
  double table_max_;
};

/// Spatial profile of the truncated and mollified field at radius r, by direct quadrature.
double mollified_profile(const DriftField& field, const MollificationSchedule& schedule, double r, int gauss_order);

/// Mollifier mass normalization 1 / int_{B(0,1)} (1 - |y|^2)^4 dy.
double bump_normalization(int d);

}  // namespace sslab::drift
