#include "sslab/drift/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"

namespace sslab::drift {

namespace {

constexpr double kAnalyticTolerance = 1e-9;

struct Profile {
  double a = 0.0;
  double len = 1.0;
  std::vector<double> coeff;  // modulation cos(2 pi m sigma) / m, m = 1..
};

double profile_value(const Profile& p, double s) {
  const double sigma = (s - p.a) / p.len;
  if (sigma <= 0.0 || sigma >= 1.0) return 0.0;
  const double sn = std::sin(std::numbers::pi * sigma);
  double mod = 1.0;
  for (std::size_t m = 0; m < p.coeff.size(); ++m) mod += p.coeff[m] * std::cos(2.0 * std::numbers::pi * (m + 1) * sigma);
  return sn * sn * mod;
}

std::vector<Profile> build_family(const TestFamily& f) {
  require(f.scales_per_decade >= 1 && f.r_inner_min > 0.0 && f.r_inner_max >= f.r_inner_min && !f.log_lengths.empty(),
          ErrorCode::invalid_parameter, "malformed test family");
  std::vector<Profile> out;
  const double dec_lo = std::log10(f.r_inner_min), dec_hi = std::log10(f.r_inner_max);
  const int steps = static_cast<int>(std::floor((dec_hi - dec_lo) * f.scales_per_decade + 1e-9));
  for (double len : f.log_lengths)
    for (int i = 0; i <= steps; ++i) {
      Profile p;
      p.a = (dec_lo + static_cast<double>(i) / f.scales_per_decade) * std::numbers::ln10;
      p.len = len;
      out.push_back(p);
    }
  std::mt19937_64 rng(f.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double len_max = *std::max_element(f.log_lengths.begin(), f.log_lengths.end());
  for (int k = 0; k < f.random_profiles; ++k) {
    Profile p;
    p.a = (dec_lo + (dec_hi - dec_lo) * unit(rng)) * std::numbers::ln10;
    p.len = std::exp(std::log(len_max) * unit(rng));
    for (int m = 1; m <= 4; ++m) p.coeff.push_back((2.0 * unit(rng) - 1.0) * 0.5 / m);
    out.push_back(p);
  }
  return out;
}

// r^2 m(r) on the s-grid, m the spherical mean of |b|^2.
struct Weighted {
  double s0 = 0.0;
  double hs = 0.0;
  std::vector<double> w;
};

Weighted sample(const DriftField& field, double t, double s_lo, double s_hi, double nodes_per_unit) {
  Weighted g;
  g.hs = 1.0 / nodes_per_unit;
  g.s0 = s_lo;
  const auto n = static_cast<std::size_t>(std::ceil((s_hi - s_lo) / g.hs)) + 1;
  g.w.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = s_lo + g.hs * static_cast<double>(j);
    const double r = std::exp(s);
    g.w[j] = field.sphere_mean_square(t, r) * r * r;
  }
  return g;
}

double quotient(const Weighted& g, const Profile& p, double k, int stride) {
  const double hs = g.hs * stride;
  const auto j0 = static_cast<std::ptrdiff_t>(std::floor((p.a - g.s0) / g.hs));
  const auto j1 = static_cast<std::ptrdiff_t>(std::ceil((p.a + p.len - g.s0) / g.hs));
  double num = 0.0, den = 0.0;
  auto phi = [&](std::ptrdiff_t j) { return profile_value(p, g.s0 + g.hs * static_cast<double>(j)); };
  for (std::ptrdiff_t j = j0; j <= j1; j += stride) {
    if (j < 0 || j >= static_cast<std::ptrdiff_t>(g.w.size())) continue;
    const double v = phi(j);
    const double dv = (phi(j + stride) - phi(j - stride)) / (2.0 * hs);
    const double e = dv - k * v;
    num += g.w[static_cast<std::size_t>(j)] * v * v;
    den += e * e;
  }
  return den > 0.0 ? num / den : 0.0;
}

std::string grid_text(const CertGrid& grid) {
  return "log-r trapezoid " + fmt(grid.nodes_per_unit) + " nodes/unit at t=" + fmt(grid.t);
}

}  // namespace

std::string to_string(CertMethod method) {
  return method == CertMethod::analytic ? "analytic" : "rayleigh_numeric";
}

std::string TestFamily::describe() const {
  std::ostringstream os;
  os << "hardy sin^2 log-profiles " << scales_per_decade << "/decade r0 in [" << fmt(r_inner_min) << ","
     << fmt(r_inner_max) << "] lengths " << join(log_lengths, '/') << " + " << random_profiles
     << " random (seed " << seed << ")";
  return os.str();
}

double FormBoundCertificate::g_at(double t) const {
  if (g_delta.empty()) return 0.0;
  if (g_delta.size() == 1 || t <= g_delta.front().first) return g_delta.front().second;
  for (std::size_t i = 1; i < g_delta.size(); ++i)
    if (t <= g_delta[i].first) return std::max(g_delta[i - 1].second, g_delta[i].second);
  return g_delta.back().second;
}

FormBoundCertificate certify_form_bound(const DriftField& field, const CertGrid& grid, const TestFamily& family) {
  require(grid.nodes_per_unit >= 2.0, ErrorCode::invalid_parameter, "certification grid too coarse");
  FormBoundCertificate cert;
  cert.field_id = field.id();
  if (field.kind() == DriftKind::bounded_smooth) {
    const double b = field.sup_bound().value_or(0.0);
    cert.delta = kAnalyticTolerance;
    cert.tolerance = kAnalyticTolerance;
    cert.g_delta = {{grid.t, b * b}};
    cert.method = CertMethod::analytic;
    cert.family = "pointwise |b xi|^2 <= B^2 xi^2";
    cert.grid = "none";
    return cert;
  }

  const int d = field.d();
  // r^d m(r) must vanish at the origin for |b|^2 xi^2 to be integrable near 0.
  const double r_a = 1e-30, r_b = 1e-60;
  const double ma = field.sphere_mean_square(grid.t, r_a), mb = field.sphere_mean_square(grid.t, r_b);
  if (mb > 0.0) {
    const double la = std::log(ma) + d * std::log(r_a);
    const double lb = std::log(mb) + d * std::log(r_b);
    if (!(ma > 0.0) || lb >= la + std::log(0.5) || !std::isfinite(lb))
      throw CertificateFailure("|b|^2 is not locally integrable at the origin for " + field.id(), INFINITY);
  }

  const auto profiles = build_family(family);
  double s_lo = INFINITY, s_hi = -INFINITY;
  for (const auto& p : profiles) {
    s_lo = std::min(s_lo, p.a);
    s_hi = std::max(s_hi, p.a + p.len);
  }
  const double pad = 4.0 / grid.nodes_per_unit;
  const Weighted g = sample(field, grid.t, s_lo - pad, s_hi + pad, grid.nodes_per_unit);
  const double k = 0.5 * (d - 2);
  double best = 0.0;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const double q = quotient(g, profiles[i], k, 1);
    if (!std::isfinite(q)) throw CertificateFailure("non-finite Rayleigh quotient for " + field.id(), q);
    if (q > best) {
      best = q;
      best_i = i;
    }
  }
  cert.delta = best;
  cert.g_delta = {{grid.t, 0.0}};
  cert.tolerance = profiles.empty() ? 0.0 : std::abs(best - quotient(g, profiles[best_i], k, 2));
  cert.method = CertMethod::rayleigh_numeric;
  cert.family = family.describe();
  cert.grid = grid_text(grid);
  cert.lower_bound = true;
  return cert;
}

RefinedCertificate certify_refined(const DriftField& field, const std::vector<double>& nodes_per_unit,
                                   const TestFamily& family) {
  require(!nodes_per_unit.empty(), ErrorCode::invalid_parameter, "no refinement levels");
  RefinedCertificate out;
  for (double n : nodes_per_unit) {
    out.certificate = certify_form_bound(field, CertGrid{n, 0.0}, family);
    out.level_delta.push_back(out.certificate.delta);
  }
  if (out.level_delta.size() >= 2 && out.certificate.method == CertMethod::rayleigh_numeric)
    out.certificate.tolerance = std::abs(out.level_delta.back() - out.level_delta[out.level_delta.size() - 2]);
  return out;
}

std::string certificate_csv_header() { return "kind,d,params,delta,g,tolerance,method"; }

std::string certificate_csv_row(const DriftField& field, const FormBoundCertificate& cert) {
  std::string g = cert.g_delta.size() <= 1 ? fmt(cert.g_at(0.0)) : "table";
  return to_string(field.kind()) + "," + std::to_string(field.d()) + "," + join(field.params(), '/') + "," +
         fmt(cert.delta) + "," + g + "," + fmt(cert.tolerance) + "," + to_string(cert.method);
}

}  // namespace sslab::drift
