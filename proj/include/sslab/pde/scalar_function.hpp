#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace sslab::pde {

/// Scalar function of (t, x) with gradient and Laplacian in x.
class ScalarFunction {
 public:
  explicit ScalarFunction(int d) : d_(d) {}
  virtual ~ScalarFunction() = default;

  int d() const noexcept { return d_; }
  virtual double value(double t, const double* x) const = 0;
  /// Defaults to fourth-order central differences.
  virtual void gradient(double t, const double* x, double* g) const;
  virtual double laplacian(double t, const double* x) const;
  virtual std::string id() const = 0;
  /// Radius of a ball around `center()` containing the support.
  virtual std::optional<double> support_radius() const { return std::nullopt; }
  virtual std::array<double, 4> center() const { return {}; }
  virtual double sup_abs() const = 0;
  virtual bool time_dependent() const { return false; }

 private:
  int d_;
};

using ScalarPtr = std::shared_ptr<const ScalarFunction>;

ScalarPtr make_constant(int d, double c);
/// amp exp(-|x - c|^2 / (2 sigma^2))
ScalarPtr make_gaussian(int d, double amp, double sigma, std::array<double, 4> center = {});
/// amp (1 - |x - c|^2 / R^2)^4 on |x - c| < R; C^3 with compact support.
ScalarPtr make_poly_bump(int d, double amp, double radius, std::array<double, 4> center = {});
ScalarPtr make_function(int d, std::function<double(double, const double*)> f, std::string id, double sup_abs);
/// "const:c", "gaussian:amp=1:sigma=0.3[:center=a/b/c]", "bump:amp=1:radius=0.75[:center=...]"
ScalarPtr scalar_from_id(int d, const std::string& id);

}  // namespace sslab::pde
