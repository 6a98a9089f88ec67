#include "sslab/pde/scalar_function.hpp"

#include <cmath>
#include <map>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"

namespace sslab::pde {

namespace {

constexpr double kFdStep = 1e-3;

std::string center_text(int d, const std::array<double, 4>& c) {
  bool zero = true;
  for (int a = 0; a < d; ++a) zero = zero && c[a] == 0.0;
  if (zero) return "";
  std::string s = ":center=";
  for (int a = 0; a < d; ++a) s += (a ? "/" : "") + fmt(c[a]);
  return s;
}

double dist2(int d, const double* x, const std::array<double, 4>& c) {
  double s = 0.0;
  for (int a = 0; a < d; ++a) s += (x[a] - c[a]) * (x[a] - c[a]);
  return s;
}

class Constant final : public ScalarFunction {
 public:
  Constant(int d, double c) : ScalarFunction(d), c_(c) {}
  double value(double, const double*) const override { return c_; }
  void gradient(double, const double*, double* g) const override {
    for (int a = 0; a < d(); ++a) g[a] = 0.0;
  }
  double laplacian(double, const double*) const override { return 0.0; }
  std::string id() const override { return "const:" + fmt(c_); }
  double sup_abs() const override { return std::abs(c_); }

 private:
  double c_;
};

class Gaussian final : public ScalarFunction {
 public:
  Gaussian(int d, double amp, double sigma, std::array<double, 4> c)
      : ScalarFunction(d), amp_(amp), sigma_(sigma), c_(c) {
    require(sigma > 0.0, ErrorCode::invalid_parameter, "gaussian sigma must be positive");
  }
  double value(double, const double* x) const override {
    return amp_ * std::exp(-dist2(d(), x, c_) / (2.0 * sigma_ * sigma_));
  }
  void gradient(double t, const double* x, double* g) const override {
    const double v = value(t, x);
    for (int a = 0; a < d(); ++a) g[a] = -v * (x[a] - c_[a]) / (sigma_ * sigma_);
  }
  double laplacian(double t, const double* x) const override {
    const double s2 = sigma_ * sigma_;
    return value(t, x) * (dist2(d(), x, c_) / (s2 * s2) - d() / s2);
  }
  std::string id() const override {
    return "gaussian:amp=" + fmt(amp_) + ":sigma=" + fmt(sigma_) + center_text(d(), c_);
  }
  std::array<double, 4> center() const override { return c_; }
  double sup_abs() const override { return std::abs(amp_); }

 private:
  double amp_, sigma_;
  std::array<double, 4> c_;
};

class PolyBump final : public ScalarFunction {
 public:
  PolyBump(int d, double amp, double radius, std::array<double, 4> c)
      : ScalarFunction(d), amp_(amp), r_(radius), c_(c) {
    require(radius > 0.0, ErrorCode::invalid_parameter, "bump radius must be positive");
  }
  double value(double, const double* x) const override {
    const double q = dist2(d(), x, c_) / (r_ * r_);
    if (q >= 1.0) return 0.0;
    const double s = 1.0 - q;
    return amp_ * s * s * s * s;
  }
  void gradient(double, const double* x, double* g) const override {
    const double q = dist2(d(), x, c_) / (r_ * r_);
    const double s = q < 1.0 ? 1.0 - q : 0.0;
    for (int a = 0; a < d(); ++a) g[a] = -8.0 * amp_ * s * s * s * (x[a] - c_[a]) / (r_ * r_);
  }
  double laplacian(double, const double* x) const override {
    const double q = dist2(d(), x, c_) / (r_ * r_);
    if (q >= 1.0) return 0.0;
    const double s = 1.0 - q;
    return -8.0 * amp_ / (r_ * r_) * s * s * (d() * s - 6.0 * q);
  }
  std::string id() const override {
    return "bump:amp=" + fmt(amp_) + ":radius=" + fmt(r_) + center_text(d(), c_);
  }
  std::optional<double> support_radius() const override { return r_; }
  std::array<double, 4> center() const override { return c_; }
  double sup_abs() const override { return std::abs(amp_); }

 private:
  double amp_, r_;
  std::array<double, 4> c_;
};

class Lambda final : public ScalarFunction {
 public:
  Lambda(int d, std::function<double(double, const double*)> f, std::string id, double sup)
      : ScalarFunction(d), f_(std::move(f)), id_(std::move(id)), sup_(sup) {}
  double value(double t, const double* x) const override { return f_(t, x); }
  std::string id() const override { return id_; }
  double sup_abs() const override { return sup_; }
  bool time_dependent() const override { return true; }

 private:
  std::function<double(double, const double*)> f_;
  std::string id_;
  double sup_;
};

}  // namespace

void ScalarFunction::gradient(double t, const double* x, double* g) const {
  double y[4];
  for (int a = 0; a < d_; ++a) y[a] = x[a];
  for (int a = 0; a < d_; ++a) {
    const double h = kFdStep;
    y[a] = x[a] + h;
    const double p1 = value(t, y);
    y[a] = x[a] + 2 * h;
    const double p2 = value(t, y);
    y[a] = x[a] - h;
    const double m1 = value(t, y);
    y[a] = x[a] - 2 * h;
    const double m2 = value(t, y);
    y[a] = x[a];
    g[a] = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
  }
}

double ScalarFunction::laplacian(double t, const double* x) const {
  double y[4];
  for (int a = 0; a < d_; ++a) y[a] = x[a];
  const double c = value(t, x);
  double acc = 0.0;
  for (int a = 0; a < d_; ++a) {
    const double h = kFdStep;
    y[a] = x[a] + h;
    const double p1 = value(t, y);
    y[a] = x[a] + 2 * h;
    const double p2 = value(t, y);
    y[a] = x[a] - h;
    const double m1 = value(t, y);
    y[a] = x[a] - 2 * h;
    const double m2 = value(t, y);
    y[a] = x[a];
    acc += (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h);
  }
  return acc;
}

ScalarPtr make_constant(int d, double c) { return std::make_shared<Constant>(d, c); }
ScalarPtr make_gaussian(int d, double amp, double sigma, std::array<double, 4> center) {
  return std::make_shared<Gaussian>(d, amp, sigma, center);
}
ScalarPtr make_poly_bump(int d, double amp, double radius, std::array<double, 4> center) {
  return std::make_shared<PolyBump>(d, amp, radius, center);
}
ScalarPtr make_function(int d, std::function<double(double, const double*)> f, std::string id, double sup_abs) {
  return std::make_shared<Lambda>(d, std::move(f), std::move(id), sup_abs);
}

ScalarPtr scalar_from_id(int d, const std::string& id) {
  const auto parts = split(id, ':');
  if (parts[0] == "const") {
    require(parts.size() == 2, ErrorCode::invalid_parameter, "const id is 'const:<value>'");
    return make_constant(d, parse_double(parts[1]));
  }
  std::map<std::string, std::string> kv;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    require(eq != std::string::npos, ErrorCode::invalid_parameter, "malformed function id '" + id + "'");
    kv[parts[i].substr(0, eq)] = parts[i].substr(eq + 1);
  }
  std::array<double, 4> c{};
  if (kv.count("center")) {
    const auto v = parse_list(kv["center"], '/');
    require(static_cast<int>(v.size()) == d, ErrorCode::invalid_parameter, "center needs d components");
    for (int a = 0; a < d; ++a) c[a] = v[a];
  }
  const double amp = kv.count("amp") ? parse_double(kv["amp"]) : 1.0;
  if (parts[0] == "gaussian") {
    require(kv.count("sigma"), ErrorCode::invalid_parameter, "gaussian id lacks sigma");
    return make_gaussian(d, amp, parse_double(kv["sigma"]), c);
  }
  if (parts[0] == "bump") {
    require(kv.count("radius"), ErrorCode::invalid_parameter, "bump id lacks radius");
    return make_poly_bump(d, amp, parse_double(kv["radius"]), c);
  }
  fail(ErrorCode::invalid_parameter, "unknown function kind '" + parts[0] + "'");
}

}  // namespace sslab::pde
