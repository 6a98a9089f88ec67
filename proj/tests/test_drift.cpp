#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "sslab/core/error.hpp"
#include "sslab/drift/certificate.hpp"
#include "sslab/drift/drift_field.hpp"
#include "sslab/drift/mollify.hpp"

using namespace sslab;
using namespace sslab::drift;

namespace {

// Hardy quotient of xi = r^{-k} sin^2(pi (log r - a)/len) against sqrt(delta) k x/|x|^2:
// delta k^2 int phi^2 / (int phi'^2 + k^2 int phi^2) = delta / (1 + 4 pi^2 / (3 k^2 len^2)).
double hardy_sin2_quotient(int d, double delta, double len) {
  const double k = 0.5 * (d - 2);
  const double pi = std::numbers::pi;
  return delta / (1.0 + 4.0 * pi * pi / (3.0 * k * k * len * len));
}

double l2_distance_to_inverse_square(double delta, int n) {
  auto b = make_inverse_square(3, delta);
  auto bn = mollify(b, MollificationSchedule::standard(n));
  const double k = 0.5 * std::sqrt(delta);
  auto f = [&](double r) {
    const double diff = bn->radial_profile(0.0, r) - k / r;
    return diff * diff * r * r;
  };
  using boost::math::quadrature::gauss_kronrod;
  const double w = 1.0 / n;
  double total = gauss_kronrod<double, 61>::integrate(f, 0.0, k / n, 8, 1e-10);
  total += gauss_kronrod<double, 61>::integrate(f, k / n, k / n + 2 * w, 8, 1e-10);
  total += gauss_kronrod<double, 61>::integrate(f, k / n + 2 * w, 2.0, 8, 1e-10);
  return std::sqrt(4.0 * std::numbers::pi * total);
}

}  // namespace

TEST(InverseSquare, Substitution) {
  auto b = make_inverse_square(3, 1.0);
  double x[3] = {1, 0, 0}, out[3];
  b->eval(0.0, x, out);
  EXPECT_DOUBLE_EQ(out[0], 0.5);
  EXPECT_DOUBLE_EQ(out[1], 0.0);

  auto b9 = make_inverse_square(3, 9.0);
  double y[3] = {0, 2, 0};
  b9->eval(0.0, y, out);
  // coefficient 3 * 0.5 / |x|^2 = 0.375 times x = (0, 2, 0)
  EXPECT_DOUBLE_EQ(out[1], 0.75);
  EXPECT_DOUBLE_EQ(out[0], 0.0);

  auto b4 = make_inverse_square(4, 4.0);
  double z[4] = {0.3, -0.7, 1.1, 0.2};
  const double r = std::sqrt(0.09 + 0.49 + 1.21 + 0.04);
  EXPECT_NEAR(b4->magnitude(0.0, z), 2.0 / r, 1e-14);
  EXPECT_FALSE(b4->time_dependent());
}

TEST(InverseSquare, Errors) {
  try {
    make_inverse_square(2, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_dimension);
  }
  try {
    make_inverse_square(3, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_parameter);
  }
}

TEST(PCritical, Values) {
  EXPECT_EQ(p_critical(1.0), 2.0);
  EXPECT_DOUBLE_EQ(p_critical(2.25), 4.0);
  const double big = p_critical(3.9999);
  EXPECT_GT(big, 1e3);
  EXPECT_TRUE(std::isfinite(big));
  double prev = 0.0;
  for (int i = 1; i < 400; ++i) {
    const double v = p_critical(i * 0.01);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_THROW(p_critical(4.0), Error);
  EXPECT_THROW(p_critical(0.0), Error);
}

TEST(Lps, Exponents) {
  auto bs = lps_exponents(*make_bounded_smooth(3, {0.5, 0, 0}, 1.0));
  ASSERT_TRUE(bs);
  EXPECT_TRUE(std::isinf(bs->q));
  EXPECT_TRUE(std::isinf(bs->r));
  EXPECT_FALSE(bs->critical);
  EXPECT_FALSE(lps_exponents(*make_inverse_square(3, 1.0)));

  auto lp = lps_exponents(*make_lps_power(3, 0.5, 1.0));
  ASSERT_TRUE(lp);
  EXPECT_DOUBLE_EQ(3.0 / lp->r, 0.5);
  EXPECT_TRUE(lp->r_open);
  EXPECT_TRUE(std::isinf(lp->q));
  EXPECT_TRUE(lp->critical);
  // L^{r'} membership of |x|^{-a} 1{|x|<=1}: int_0^1 r^{-a r'} r^{d-1} dr < inf iff a r' < d.
  const double below = lp->r * 0.99;
  EXPECT_LT(0.5 * below, 3.0);
}

TEST(Catalog, IdRoundTrip) {
  for (std::string id : {"inverse-square:d=3:delta=1", "bounded-smooth:d=3:v=0.5/0/0:width=inf", "zero:d=3",
                         "lps-power:d=3:a=0.5:amp=1", "mollified:n=8:inverse-square:d=3:delta=9"}) {
    auto f = make_from_id(id);
    auto g = make_from_id(f->id());
    EXPECT_EQ(f->id(), g->id()) << id;
  }
  EXPECT_THROW(make_from_id("nope:d=3"), Error);
  EXPECT_THROW(make_from_id("inverse-square:d=3"), Error);
}

TEST(Certificate, HardyOracle) {
  for (double delta : {0.25, 1.0, 2.25}) {
    auto b = make_inverse_square(3, delta);
    const auto cert = certify_form_bound(*b, CertGrid{32.0});
    const double oracle = hardy_sin2_quotient(3, delta, 128.0);
    EXPECT_NEAR(cert.delta, oracle, 2e-3 * delta) << delta;
    EXPECT_LE(cert.delta, delta * 1.0001);
    EXPECT_GE(cert.delta, 0.95 * delta);
    EXPECT_EQ(cert.method, CertMethod::rayleigh_numeric);
    EXPECT_TRUE(cert.lower_bound);
  }
}

TEST(Certificate, HardyOracleOtherDimensions) {
  for (int d : {4, 5}) {
    auto b = make_inverse_square(d, 1.0);
    const auto cert = certify_form_bound(*b, CertGrid{32.0});
    EXPECT_NEAR(cert.delta, hardy_sin2_quotient(d, 1.0, 128.0), 2e-3);
  }
}

TEST(Certificate, Refinement) {
  auto b = make_inverse_square(3, 1.0);
  const auto rc = certify_refined(*b, {8.0, 16.0, 32.0});
  ASSERT_EQ(rc.level_delta.size(), 3u);
  for (double v : rc.level_delta) EXPECT_NEAR(v, 1.0, 0.05);
  EXPECT_LT(rc.certificate.tolerance, 0.01);
}

TEST(Certificate, BoundedAndZero) {
  const auto z = certify_form_bound(*make_zero(3));
  EXPECT_EQ(z.method, CertMethod::analytic);
  EXPECT_DOUBLE_EQ(z.delta, z.tolerance);
  EXPECT_DOUBLE_EQ(z.g_at(0.0), 0.0);
  const auto bs = certify_form_bound(*make_bounded_smooth(3, {0.6, 0.8, 0}, 2.0));
  EXPECT_DOUBLE_EQ(bs.delta, bs.tolerance);
  EXPECT_NEAR(bs.g_at(0.3), 1.0, 1e-14);
}

TEST(Certificate, NonIntegrable) {
  auto b = make_lps_power(3, 1.6, 1.0);
  try {
    certify_form_bound(*b);
    FAIL();
  } catch (const CertificateFailure& e) {
    EXPECT_EQ(e.code(), ErrorCode::certificate_failure);
    EXPECT_TRUE(std::isinf(e.quotient()) || e.quotient() > 1e6);
  }
}

TEST(Certificate, CsvRow) {
  auto b = make_inverse_square(3, 1.0);
  const auto cert = certify_form_bound(*b);
  const auto row = certificate_csv_row(*b, cert);
  EXPECT_EQ(row.rfind("inverse_square,3,", 0), 0u);
  EXPECT_NE(row.find("rayleigh_numeric"), std::string::npos);
  EXPECT_EQ(certificate_csv_header(), "kind,d,params,delta,g,tolerance,method");
}

TEST(Mollify, TimeFactor) {
  EXPECT_DOUBLE_EQ(time_factor(0.0, 8.0, 0.125), 1.0);
  EXPECT_DOUBLE_EQ(time_factor(7.875, 8.0, 0.125), 1.0);
  EXPECT_NEAR(time_factor(8.0, 8.0, 0.125), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(time_factor(8.2, 8.0, 0.125), 0.0);
  EXPECT_NEAR(time_factor(-7.95, 8.0, 0.125), time_factor(7.95, 8.0, 0.125), 1e-15);
}

TEST(Mollify, ZeroStaysZero) {
  for (int n : {2, 8, 32}) {
    auto z = mollify(make_zero(3), MollificationSchedule::standard(n));
    double x[3] = {0.1, 0.2, -0.3}, out[3];
    z->eval(0.5, x, out);
    EXPECT_EQ(out[0], 0.0);
    EXPECT_EQ(out[1], 0.0);
    EXPECT_EQ(out[2], 0.0);
  }
}

// Brute-force 3D midpoint cubature of the truncated field against the bump.
TEST(Mollify, ProfileMatchesCubature) {
  const int n = 8;
  const double delta = 1.0;
  auto b = make_inverse_square(3, delta);
  auto bn = mollify(b, MollificationSchedule::standard(n));
  const double w = 1.0 / n;
  const double k = 0.5 * std::sqrt(delta);
  for (double r : {0.02, 0.1, 0.5, 1.3}) {
    const int m = 120;
    const double hstep = 2.0 * w / m;
    double acc = 0.0, mass = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l) {
          const double y0 = -w + (i + 0.5) * hstep, y1 = -w + (j + 0.5) * hstep, y2 = -w + (l + 0.5) * hstep;
          const double q = (y0 * y0 + y1 * y1 + y2 * y2) / (w * w);
          if (q >= 1.0) continue;
          const double kern = std::pow(1.0 - q, 4);
          mass += kern;
          const double p0 = r - y0;
          const double u = std::sqrt(p0 * p0 + y1 * y1 + y2 * y2);
          const double mag = k / u;
          if (u > n || mag > n) continue;
          acc += kern * mag * p0 / u;
        }
    EXPECT_NEAR(bn->radial_profile(0.0, r), acc / mass, 1e-2 * std::max(1.0, acc / mass)) << r;
  }
}

TEST(Mollify, CapAndBoundedness) {
  for (int n : {4, 8, 16}) {
    auto bn = mollify(make_inverse_square(3, 9.0), MollificationSchedule::standard(n));
    double sup = 0.0;
    for (int i = 0; i <= 4000; ++i) sup = std::max(sup, std::abs(bn->radial_profile(0.0, i * 1e-3)));
    EXPECT_LE(sup, n * (1.0 + 1e-9)) << n;
    double x[3] = {0, 0, 0}, out[3];
    bn->eval(0.0, x, out);
    EXPECT_TRUE(std::isfinite(out[0]));
    x[0] = n + 1.0 / n + 0.01;
    bn->eval(0.0, x, out);
    EXPECT_EQ(out[0], 0.0);
  }
}

TEST(Mollify, LocalL2ConvergenceTrend) {
  const double d8 = l2_distance_to_inverse_square(1.0, 8);
  const double d16 = l2_distance_to_inverse_square(1.0, 16);
  const double d32 = l2_distance_to_inverse_square(1.0, 32);
  EXPECT_LT(d16, d8);
  EXPECT_LT(d32, d16);
}

TEST(Mollify, TableMatchesDirectQuadrature) {
  auto b = make_inverse_square(3, 2.0);
  const auto sched = MollificationSchedule::standard(16);
  auto bn = std::dynamic_pointer_cast<const MollifiedField>(mollify(b, sched));
  ASSERT_TRUE(bn);
  for (double r : {0.003, 0.05, 0.2, 0.77, 3.1}) {
    const double direct = mollified_profile(*b, sched, r, 24);
    EXPECT_NEAR(bn->radial_profile(0.0, r), direct, 2e-4 * std::max(1.0, std::abs(direct))) << r;
  }
}

TEST(Mollify, ScalarRadialField) {
  auto c = make_bounded_smooth(3, {0.5, 0.0, 0.0}, INFINITY);
  auto cn = mollify(c, MollificationSchedule::standard(4));
  double x[3] = {0.3, 0.1, 0.2}, out[3];
  cn->eval(0.0, x, out);
  EXPECT_NEAR(out[0], 0.5, 1e-12);
  EXPECT_NEAR(out[1], 0.0, 1e-15);
}

TEST(Mollify, PreservesFormBound) {
  auto b = make_inverse_square(3, 1.0);
  const auto base = certify_form_bound(*b);
  for (int n : {4, 8, 16}) {
    const auto cert = certify_form_bound(*mollify(b, MollificationSchedule::standard(n)));
    EXPECT_LE(cert.delta, base.delta + 0.01) << n;
  }
}

TEST(Difference, TriangleBound) {
  auto b = make_inverse_square(3, 1.0);
  auto b4 = mollify(b, MollificationSchedule::standard(4));
  auto b16 = mollify(b, MollificationSchedule::standard(16));
  auto diff = make_difference(b4, b16);
  EXPECT_EQ(diff->kind(), DriftKind::difference);
  const double d1 = certify_form_bound(*b4).delta;
  const double d2 = certify_form_bound(*b16).delta;
  const auto cd = certify_form_bound(*diff);
  const double bound = std::pow(std::sqrt(d1) + std::sqrt(d2), 2);
  EXPECT_LE(cd.delta, bound + 0.01);
  EXPECT_THROW(make_difference(b4, make_inverse_square(4, 1.0)), Error);
}
