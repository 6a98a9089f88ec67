#include "sslab/drift/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sslab/core/gauss.hpp"

namespace sslab::drift {

namespace {

// Antiderivative of (1 - u^2)^4 normalized to a CDF on [-1, 1].
double bump_cdf(double s) {
  if (s <= -1.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double s2 = s * s;
  const double prim = s * (1.0 + s2 * (-4.0 / 3.0 + s2 * (6.0 / 5.0 + s2 * (-4.0 / 7.0 + s2 / 9.0))));
  return 0.5 + prim * (315.0 / 256.0);
}

double value_scale(const DriftField& field) {
  if (field.symmetry() != Symmetry::scalar_radial) return 1.0;
  const auto v = field.direction();
  double s = 0.0;
  for (int a = 0; a < field.d(); ++a) s += v[a] * v[a];
  return std::sqrt(s);
}

// Radii u where the truncated profile u -> F(u) 1{u <= cap} 1{|F(u)| <= value_cap} jumps.
std::vector<double> truncation_cuts(const DriftField& field, const MollificationSchedule& s) {
  std::vector<double> cuts = field.profile_breaks();
  cuts.push_back(s.space_cap);
  const double scale = value_scale(field);
  auto excess = [&](double u) { return std::abs(field.radial_profile(0.0, u)) * scale - s.value_cap; };
  const int samples = 2000;
  const double lo = std::log(1e-12), hi = std::log(s.space_cap);
  double prev_u = std::exp(lo);
  double prev = excess(prev_u);
  for (int i = 1; i <= samples; ++i) {
    const double u = std::exp(lo + (hi - lo) * i / samples);
    const double cur = excess(u);
    if ((prev > 0.0) != (cur > 0.0)) {
      double a = prev_u, b = u;
      for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        const double m = 0.5 * (a + b);
        if ((excess(m) > 0.0) == (prev > 0.0)) a = m;
        else b = m;
      }
      cuts.push_back(0.5 * (a + b));
    }
    prev = cur;
    prev_u = u;
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

double truncated(const DriftField& field, const MollificationSchedule& s, double scale, double u) {
  if (u > s.space_cap) return 0.0;
  const double f = field.radial_profile(0.0, u);
  if (!(std::abs(f) * scale <= s.value_cap)) return 0.0;
  return f;
}

double profile_with_cuts(const DriftField& field, const MollificationSchedule& s, const std::vector<double>& cuts,
                         double r, int order) {
  const int d = field.d();
  const bool vec = field.symmetry() == Symmetry::vector_radial;
  const double w = s.width;
  const double scale = value_scale(field);
  const auto& gl = gauss_legendre(order);
  const double norm = bump_normalization(d) * unit_sphere_area(d - 1);

  if (r == 0.0) {
    if (vec) return 0.0;
    auto radial = [&](double sr) {
      const double rho = w * sr;
      return std::pow(sr, d - 1) * std::pow(1.0 - sr * sr, 4) * truncated(field, s, scale, rho);
    };
    std::vector<double> knots{0.0, 1.0};
    for (double c : cuts)
      if (c > 0.0 && c < w) knots.push_back(c / w);
    std::sort(knots.begin(), knots.end());
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) acc += integrate(gl, knots[k], knots[k + 1], radial);
    // the theta integral of sin^{d-2} is |S^{d-1}| / |S^{d-2}|
    return acc * norm * unit_sphere_area(d) / unit_sphere_area(d - 1);
  }

  std::vector<double> rknots{0.0, w};
  auto add_r = [&](double v) {
    if (v > 0.0 && v < w) rknots.push_back(v);
  };
  add_r(r);
  for (double c : cuts) {
    add_r(std::abs(r - c));
    add_r(r + c);
  }
  std::sort(rknots.begin(), rknots.end());

  auto theta_integral = [&](double rho) {
    std::vector<double> tknots{0.0, std::numbers::pi};
    const double umin = std::abs(r - rho), umax = r + rho;
    for (double c : cuts)
      if (c > umin && c < umax) {
        const double cs = std::clamp((r * r + rho * rho - c * c) / (2.0 * r * rho), -1.0, 1.0);
        tknots.push_back(std::acos(cs));
      }
    std::sort(tknots.begin(), tknots.end());
    auto inner = [&](double th) {
      const double ct = std::cos(th);
      const double u = std::sqrt(std::max(0.0, r * r + rho * rho - 2.0 * r * rho * ct));
      if (u == 0.0) return 0.0;
      double f = truncated(field, s, scale, u);
      if (vec) f *= (r - rho * ct) / u;
      return f * std::pow(std::sin(th), d - 2);
    };
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < tknots.size(); ++k)
      if (tknots[k + 1] > tknots[k]) acc += integrate(gl, tknots[k], tknots[k + 1], inner);
    return acc;
  };
  auto radial = [&](double rho) {
    const double sr = rho / w;
    return std::pow(sr, d - 1) * std::pow(1.0 - sr * sr, 4) * theta_integral(rho) / w;
  };
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < rknots.size(); ++k)
    if (rknots[k + 1] > rknots[k]) acc += integrate(gl, rknots[k], rknots[k + 1], radial);
  return acc * norm;
}

}  // namespace

MollificationSchedule MollificationSchedule::standard(int n) {
  require(n >= 1, ErrorCode::invalid_parameter, "mollification index must be >= 1");
  MollificationSchedule s;
  s.n = n;
  s.time_cap = s.space_cap = s.value_cap = n;
  s.width = 1.0 / n;
  return s;
}

void MollificationSchedule::validate() const {
  require(n >= 1, ErrorCode::invalid_parameter, "mollification index must be >= 1");
  require(time_cap > 0.0 && space_cap > 0.0 && value_cap > 0.0, ErrorCode::invalid_parameter,
          "mollification caps must be positive");
  require(width > 0.0 && std::isfinite(width), ErrorCode::invalid_parameter, "mollifier width must be positive");
}

double bump_normalization(int d) {
  const double radial = 0.5 * std::tgamma(0.5 * d) * std::tgamma(5.0) / std::tgamma(0.5 * d + 5.0);
  return 1.0 / (unit_sphere_area(d) * radial);
}

double time_factor(double t, double cap, double width) {
  return bump_cdf((t + cap) / width) - bump_cdf((t - cap) / width);
}

double mollified_profile(const DriftField& field, const MollificationSchedule& schedule, double r, int gauss_order) {
  schedule.validate();
  require(field.symmetry() != Symmetry::none, ErrorCode::invalid_parameter,
          "mollification needs a radially symmetric field");
  return profile_with_cuts(field, schedule, truncation_cuts(field, schedule), r, gauss_order);
}

MollifiedField::MollifiedField(DriftPtr inner, const MollificationSchedule& schedule, const MollifyOptions& options)
    : DriftField(DriftKind::mollified, inner->d(),
                 {static_cast<double>(schedule.n), schedule.time_cap, schedule.space_cap, schedule.value_cap,
                  schedule.width},
                 true, schedule.space_cap + schedule.width),
      inner_(std::move(inner)),
      schedule_(schedule),
      nodes_per_zone_(options.nodes_per_zone) {
  schedule_.validate();
  require(inner_->symmetry() != Symmetry::none, ErrorCode::invalid_parameter,
          "mollification needs a radially symmetric field");
  require(options.nodes_per_zone >= 2, ErrorCode::invalid_parameter, "table needs >= 2 nodes per zone");
  const double w = schedule_.width;
  const double reach = schedule_.space_cap + w;
  zones_ = 1 + std::max(0, static_cast<int>(std::ceil(std::log2(reach / w))));
  const int k = nodes_per_zone_;
  values_.assign(static_cast<std::size_t>(zones_) * (k + 1), 0.0);
  const auto cuts = truncation_cuts(*inner_, schedule_);
  table_max_ = 0.0;
  for (int z = 0; z < zones_; ++z)
    for (int i = 0; i <= k; ++i) {
      const double r = z == 0 ? w * i / k : w * std::ldexp(1.0, z - 1) * (1.0 + static_cast<double>(i) / k);
      const double v = r >= reach ? 0.0 : profile_with_cuts(*inner_, schedule_, cuts, r, options.gauss_order);
      values_[static_cast<std::size_t>(z) * (k + 1) + i] = v;
      table_max_ = std::max(table_max_, std::abs(v));
    }
}

simd::RadialTableView MollifiedField::table() const {
  return {values_.data(), schedule_.width, nodes_per_zone_, zones_, schedule_.space_cap + schedule_.width};
}

double MollifiedField::time_factor_at(double t) const { return time_factor(t, schedule_.time_cap, schedule_.width); }

double MollifiedField::radial_profile(double t, double r) const {
  return time_factor_at(t) * simd::radial_table_eval(table(), r);
}

double MollifiedField::sphere_mean_square(double t, double r) const {
  const double f = radial_profile(t, r);
  if (inner_->symmetry() == Symmetry::vector_radial) return f * f;
  const auto v = inner_->direction();
  double v2 = 0.0;
  for (int a = 0; a < d(); ++a) v2 += v[a] * v[a];
  return f * f * v2;
}

void MollifiedField::eval(double t, const double* x, double* out) const {
  double r2 = 0.0;
  for (int a = 0; a < d(); ++a) r2 += x[a] * x[a];
  const double r = std::sqrt(r2);
  const double f = radial_profile(t, r);
  if (inner_->symmetry() == Symmetry::vector_radial) {
    const double g = r > 0.0 ? f / r : 0.0;
    for (int a = 0; a < d(); ++a) out[a] = g * x[a];
  } else {
    const auto v = inner_->direction();
    for (int a = 0; a < d(); ++a) out[a] = f * v[a];
  }
}

void MollifiedField::eval_block(double t, std::size_t count, const double* const* x, double* const* out) const {
  if (inner_->symmetry() == Symmetry::vector_radial) {
    simd::active_kernels().radial_drift(table(), time_factor_at(t), d(), count, x, out);
    return;
  }
  DriftField::eval_block(t, count, x, out);
}

std::string MollifiedField::id() const {
  std::string s = "mollified:n=" + std::to_string(schedule_.n);
  const auto std_s = MollificationSchedule::standard(schedule_.n);
  if (schedule_.width != std_s.width) s += ":width=" + fmt(schedule_.width);
  if (schedule_.time_cap != std_s.time_cap) s += ":tcap=" + fmt(schedule_.time_cap);
  if (schedule_.space_cap != std_s.space_cap) s += ":xcap=" + fmt(schedule_.space_cap);
  if (schedule_.value_cap != std_s.value_cap) s += ":bcap=" + fmt(schedule_.value_cap);
  return s + ":" + inner_->id();
}

std::optional<double> MollifiedField::sup_bound() const {
  double scale = 1.0;
  if (inner_->symmetry() == Symmetry::scalar_radial) scale = value_scale(*inner_);
  return table_max_ * scale;
}

DriftPtr mollify(DriftPtr field, const MollificationSchedule& schedule, const MollifyOptions& options) {
  require(field != nullptr, ErrorCode::invalid_parameter, "mollify of a null field");
  schedule.validate();
  if (auto s = field->sup_bound(); s && *s == 0.0 && field->kind() == DriftKind::bounded_smooth) return field;
  return std::make_shared<MollifiedField>(std::move(field), schedule, options);
}

}  // namespace sslab::drift
