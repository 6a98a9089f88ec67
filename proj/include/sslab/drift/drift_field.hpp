/**
 * @file drift_field.hpp
 * @brief Vector fields b(t, x) on R^d used as drifts of dX = -b dt + sqrt(2) dB.
 */
#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sslab::drift {

enum class DriftKind { inverse_square, bounded_smooth, lps_power, mollified, difference };

std::string to_string(DriftKind kind);

/// Integrability exponents of the class d/r + 2/q < 1 (or <= 1).
struct LpsExponents {
  double q = 0.0;
  double r = 0.0;
  /// Membership holds for every r' < r but not at r itself.
  bool r_open = false;
  bool critical = false;
};

/// How a field depends on direction. Radial fields have b = F(|x|) x/|x|;
/// scalar-radial fields have b = F(|x|) v for a fixed vector v.
enum class Symmetry { none, vector_radial, scalar_radial };

class DriftField {
 public:
  virtual ~DriftField() = default;

  DriftKind kind() const noexcept { return kind_; }
  int d() const noexcept { return d_; }
  const std::vector<double>& params() const noexcept { return params_; }
  bool time_dependent() const noexcept { return time_dependent_; }
  std::optional<double> support_radius() const noexcept { return support_radius_; }

  /// b(t, x), x and out have d entries.
  virtual void eval(double t, const double* x, double* out) const = 0;
  /// Structure-of-arrays evaluation over `count` points.
  virtual void eval_block(double t, std::size_t count, const double* const* x, double* const* out) const;
  /// Catalog id, parseable by make_from_id.
  virtual std::string id() const = 0;
  /// sup |b| when known in closed form.
  virtual std::optional<double> sup_bound() const { return std::nullopt; }

  virtual Symmetry symmetry() const { return Symmetry::none; }
  /// F(t, r) for symmetric fields.
  virtual double radial_profile(double /*t*/, double /*r*/) const { return 0.0; }
  /// Direction v for scalar-radial fields.
  virtual std::array<double, 8> direction() const { return {}; }
  /// Radii where F jumps.
  virtual std::vector<double> profile_breaks() const { return {}; }

  /// Mean of |b(t, r w)|^2 over unit vectors w.
  virtual double sphere_mean_square(double t, double r) const;

  virtual std::optional<LpsExponents> lps() const { return std::nullopt; }

  double magnitude(double t, const double* x) const;

 protected:
  DriftField(DriftKind kind, int d, std::vector<double> params, bool time_dependent,
             std::optional<double> support_radius = std::nullopt);

 private:
  DriftKind kind_;
  int d_;
  std::vector<double> params_;
  bool time_dependent_;
  std::optional<double> support_radius_;
};

using DriftPtr = std::shared_ptr<const DriftField>;

/// sqrt(delta) (d-2)/2 |x|^-2 x.
DriftPtr make_inverse_square(int d, double delta);
/// v exp(-|x|^2 / (2 s^2)); s = +inf gives the constant field v.
DriftPtr make_bounded_smooth(int d, const std::vector<double>& v, double width);
DriftPtr make_zero(int d);
/// amp |x|^-a x/|x| on |x| <= 1, zero outside.
DriftPtr make_lps_power(int d, double a, double amp);
/// lhs - rhs.
DriftPtr make_difference(DriftPtr lhs, DriftPtr rhs);

/// Parses ids such as "inverse-square:d=3:delta=1.0" or "mollified:n=8:<inner id>".
DriftPtr make_from_id(const std::string& id);

/// 2 / (2 - sqrt(delta)) for 0 < delta < 4.
double p_critical(double delta);

std::optional<LpsExponents> lps_exponents(const DriftField& field);

/// Area of the unit sphere in R^d.
double unit_sphere_area(int d);

}  // namespace sslab::drift
