/**
 * @file certificate.hpp
 * @brief Numerical form-bound certificates from radial Rayleigh quotients.
 *
 * A certificate asserts int |b xi|^2 <= delta int |grad xi|^2 + g int xi^2 for all xi.
 * The numeric method maximizes the quotient over a finite radial family, so it
 * certifies a lower bound on the optimal delta.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sslab/drift/drift_field.hpp"

namespace sslab::drift {

enum class CertMethod { analytic, rayleigh_numeric };

std::string to_string(CertMethod method);

/// Radial quadrature on s = log r.
struct CertGrid {
  double nodes_per_unit = 32.0;
  double t = 0.0;
};

/// Test profiles xi = r^{-(d-2)/2} phi(log r) with phi supported on [a, a + len].
struct TestFamily {
  int scales_per_decade = 8;
  double r_inner_min = 1e-4;
  double r_inner_max = 1e2;
  std::vector<double> log_lengths{1, 2, 4, 8, 16, 32, 64, 128};
  int random_profiles = 32;
  std::uint64_t seed = 20240601;

  std::string describe() const;
};

struct FormBoundCertificate {
  double delta = 0.0;
  /// (t, g) samples; a single entry means constant in t.
  std::vector<std::pair<double, double>> g_delta;
  double tolerance = 0.0;
  CertMethod method = CertMethod::analytic;
  std::string family;
  std::string grid;
  bool lower_bound = false;
  std::string field_id;

  double g_at(double t) const;
};

FormBoundCertificate certify_form_bound(const DriftField& field, const CertGrid& grid = {},
                                        const TestFamily& family = {});

/// Same family on several grid levels; the returned certificate is the finest
/// level with tolerance set to the spread between the last two levels.
struct RefinedCertificate {
  FormBoundCertificate certificate;
  std::vector<double> level_delta;
};

RefinedCertificate certify_refined(const DriftField& field, const std::vector<double>& nodes_per_unit,
                                   const TestFamily& family = {});

/// kind, d, params, delta, g, tolerance, method
std::string certificate_csv_header();
std::string certificate_csv_row(const DriftField& field, const FormBoundCertificate& cert);

}  // namespace sslab::drift
