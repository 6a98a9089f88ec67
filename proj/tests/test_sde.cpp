#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sslab/core/error.hpp"
#include "sslab/core/gauss.hpp"
#include "sslab/drift/drift_field.hpp"
#include "sslab/drift/mollify.hpp"
#include "sslab/sde/engine.hpp"
#include "sslab/sde/hitting.hpp"
#include "sslab/sde/krylov.hpp"
#include "sslab/sde/martingale.hpp"
#include "sslab/sde/stats.hpp"

using namespace sslab;
using namespace sslab::sde;

namespace {

EnsembleSpec spec_of(std::size_t M, double dt, double T, std::uint64_t seed = 7, int d = 3) {
  EnsembleSpec s;
  s.d = d;
  s.M = M;
  s.dt = dt;
  s.T = T;
  s.seed = seed;
  s.jobs = 1;
  return s;
}

drift::DriftPtr mollified_inverse_square(double delta, int n) {
  return drift::mollify(drift::make_inverse_square(3, delta), drift::MollificationSchedule::standard(n));
}

}  // namespace

TEST(Stats, PairwiseSumExact) {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i + 1);
  EXPECT_DOUBLE_EQ(pairwise_sum(v.data(), v.size()), 500500.0);
  EXPECT_EQ(pairwise_sum(v.data(), 0), 0.0);
}

TEST(Stats, MeanStatMask) {
  std::vector<double> v{1.0, 2.0, 3.0, 100.0};
  std::vector<std::uint8_t> mask{0, 0, 0, 1};
  const auto s = mean_stat(v, &mask);
  EXPECT_EQ(s.n, 3u);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_NEAR(s.stderr_, 1.0 / std::sqrt(3.0), 1e-14);
}

TEST(Stats, KsDistance) {
  EXPECT_DOUBLE_EQ(ks_distance({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(ks_distance({1, 2}, {3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(ks_distance({1, 2, 3, 4}, {3, 4, 5, 6}), 0.5);
}

TEST(Stats, PowerFitRecoversExponent) {
  std::vector<double> x{0.05, 0.1, 0.2, 0.4, 0.8}, y;
  for (double t : x) y.push_back(3.0 * std::pow(t, 0.7));
  const auto f = fit_power_law(x, y);
  EXPECT_NEAR(f.mu, 0.7, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-12);
  EXPECT_NEAR(f.r2, 1.0, 1e-12);
  EXPECT_THROW(fit_power_law({1.0}, {1.0}), Error);
}

TEST(Engine, DriftlessIncrementMoments) {
  auto s = spec_of(100000, 1e-3, 1e-3);
  const auto ens = simulate(nullptr, s);
  for (int a = 0; a < 3; ++a) {
    const auto st = mean_stat(ens.final_x[a]);
    EXPECT_LT(std::abs(st.mean), 4.0 * st.stderr_);
    double sq = 0.0, q4 = 0.0;
    for (double v : ens.final_x[a]) {
      sq += v * v;
      q4 += v * v * v * v;
    }
    const double M = static_cast<double>(s.M);
    const double var = sq / M;
    const double var_se = std::sqrt((q4 / M - var * var) / M);
    EXPECT_LT(std::abs(var - 2.0 * s.dt), 4.0 * var_se);
  }
  EXPECT_EQ(ens.nonfinite, 0u);
  EXPECT_EQ(ens.capped_steps, 0u);
}

TEST(Engine, ConstantDriftMean) {
  auto s = spec_of(20000, 0.01, 0.5);
  const auto b = drift::make_bounded_smooth(3, {1.0, -2.0, 0.5}, INFINITY);
  const auto ens = simulate(b, s);
  const double c[3] = {1.0, -2.0, 0.5};
  for (int a = 0; a < 3; ++a) {
    const auto st = mean_stat(ens.final_x[a]);
    EXPECT_LT(std::abs(st.mean + c[a] * s.T), 4.0 * st.stderr_);
    EXPECT_NEAR(st.stderr_, std::sqrt(2.0 * s.T / s.M), 0.05 * st.stderr_);
  }
}

TEST(Engine, ReproducibleAcrossJobs) {
  auto s = spec_of(1000, 0.01, 0.2);
  s.x0 = {0.5, 0.0, 0.0};
  const auto b = mollified_inverse_square(9.0, 8);
  const auto one = simulate(b, s);
  s.jobs = 3;
  const auto three = simulate(b, s);
  for (int a = 0; a < 3; ++a) EXPECT_EQ(one.final_x[a], three.final_x[a]);
  EXPECT_EQ(one.min_radius, three.min_radius);
  s.seed = 8;
  const auto other = simulate(b, s);
  EXPECT_NE(one.final_x[0], other.final_x[0]);
}

TEST(Engine, PathPrefixIndependentOfEnsembleSize) {
  auto s = spec_of(300, 0.01, 0.1);
  const auto big = simulate(nullptr, s);
  s.M = 17;
  const auto small = simulate(nullptr, s);
  for (std::size_t i = 0; i < 17; ++i) EXPECT_EQ(big.final_x[1][i], small.final_x[1][i]);
}

TEST(Engine, Validation) {
  auto s = spec_of(10, 0.01, 0.1);
  s.dt = 0.0;
  EXPECT_THROW(simulate(nullptr, s), Error);
  s = spec_of(10, 0.01, 0.1);
  s.d = 9;
  EXPECT_THROW(simulate(nullptr, s), Error);
  s = spec_of(0, 0.01, 0.1);
  EXPECT_THROW(simulate(nullptr, s), Error);
  s = spec_of(10, 0.03, 0.1);
  EXPECT_THROW(simulate(nullptr, s), Error);
  s = spec_of(10, 0.01, 0.1);
  EXPECT_THROW(simulate(drift::make_zero(2), s), Error);
}

TEST(Engine, DisplacementCapCounted) {
  auto s = spec_of(256, 0.01, 0.05);
  const auto b = drift::make_bounded_smooth(3, {1e4, 0.0, 0.0}, INFINITY);
  const auto ens = simulate(b, s);
  EXPECT_EQ(ens.capped_steps, ens.total_steps);
  EXPECT_DOUBLE_EQ(ens.cap_fraction(), 1.0);
  const double cap = s.cap_factor * std::sqrt(2.0 * s.dt);
  for (double v : ens.final_x[0]) EXPECT_LE(std::abs(v), 5 * cap + 1e-12);
}

TEST(Radial, BesselDimension) {
  EXPECT_DOUBLE_EQ(bessel_dimension(3, 9.0), 1.5);
  EXPECT_DOUBLE_EQ(bessel_dimension(3, 4.0), 2.0);
  EXPECT_DOUBLE_EQ(bessel_dimension(3, 1.0), 2.5);
  EXPECT_DOUBLE_EQ(bessel_dimension(4, 16.0), 0.0);
}

TEST(Radial, CoefficientMatchesGeneratorOnNorm) {
  // (Lap - b . grad) |x| by finite differences equals radial_coefficient / |x|.
  for (double delta : {0.25, 1.0, 9.0}) {
    for (int d : {3, 4}) {
      const auto b = drift::make_inverse_square(d, delta);
      const double x[4] = {0.3, -0.4, 0.2, 0.1};
      const double hs = 1e-4;
      auto norm = [&](const double* y) {
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) r2 += y[a] * y[a];
        return std::sqrt(r2);
      };
      double lap = 0.0, adv = 0.0, bx[4];
      b->eval(0.0, x, bx);
      for (int a = 0; a < d; ++a) {
        double p[4], m[4];
        std::copy(x, x + 4, p);
        std::copy(x, x + 4, m);
        p[a] += hs;
        m[a] -= hs;
        lap += (norm(p) - 2 * norm(x) + norm(m)) / (hs * hs);
        adv += bx[a] * (norm(p) - norm(m)) / (2 * hs);
      }
      EXPECT_NEAR(lap - adv, radial_coefficient(d, delta) / norm(x), 1e-5) << d << " " << delta;
    }
  }
}

TEST(Hitting, FarStartRarelyHits) {
  auto s = spec_of(5000, 1e-3, 1.0);
  s.x0 = {10.0, 0.0, 0.0};
  const auto h = hitting_study(nullptr, s, 0.05, false);
  EXPECT_EQ(h.hits, 0u);
  EXPECT_EQ(h.ci95, 0.0);
  EXPECT_FALSE(h.p_half_dt.has_value());
}

TEST(Hitting, EpsilonCoveringStartIsCertain) {
  auto s = spec_of(300, 1e-2, 0.1);
  s.x0 = {0.5, 0.0, 0.0};
  const auto h = hitting_study(mollified_inverse_square(1.0, 8), s, 0.5, false);
  EXPECT_DOUBLE_EQ(h.p_hat, 1.0);
}

TEST(Hitting, ConfidenceIntervalFormula) {
  PathEnsemble ens;
  ens.spec = spec_of(4, 0.1, 1.0);
  ens.min_radius = {0.01, 0.5, 0.02, 0.7};
  ens.excluded = {0, 0, 0, 0};
  const auto h = hitting_probability(ens, 0.05);
  EXPECT_EQ(h.hits, 2u);
  EXPECT_DOUBLE_EQ(h.p_hat, 0.5);
  EXPECT_DOUBLE_EQ(h.ci95, 1.96 * std::sqrt(0.25 / 4.0));
  EXPECT_THROW(hitting_probability(ens, 0.0), Error);
}

TEST(Hitting, RefinementAttached) {
  auto s = spec_of(512, 2e-3, 0.1);
  s.x0 = {0.3, 0.0, 0.0};
  const auto h = hitting_study(nullptr, s, 0.2, true);
  ASSERT_TRUE(h.p_half_dt.has_value());
  EXPECT_GT(*h.ci95_half_dt, 0.0);
}

TEST(Hitting, RadialOracleDichotomy) {
  const auto hit = radial_oracle(3, 9.0, 0.5, 0.05, 1e-3, 1.0, 4000, 3);
  EXPECT_GT(hit.stats.p_hat, 0.3);
  const auto miss = radial_oracle(3, 1.0, 0.5, 0.005, 1e-3, 1.0, 4000, 3);
  EXPECT_LT(miss.stats.p_hat, 0.05);
  EXPECT_EQ(miss.survivors.size(), miss.stats.M - miss.stats.hits);
  EXPECT_THROW(radial_oracle(2, 9.0, 0.5, 0.05, 1e-3, 1.0, 10, 3), Error);
}

TEST(Hitting, RadialOracleMatchesDriftlessBrownianMotion) {
  // delta = 0: |X| of 3D Brownian motion from r0 hits eps before T with probability
  // (eps / r0) erfc((r0 - eps) / sqrt(4 T)).
  const double r0 = 1.0, eps = 0.5, T = 0.5;
  const auto o = radial_oracle(3, 0.0, r0, eps, 1e-4, T, 20000, 11);
  const double exact = eps / r0 * std::erfc((r0 - eps) / std::sqrt(4.0 * T));
  EXPECT_NEAR(o.stats.p_hat, exact, 2.0 * o.stats.ci95 + 0.01);
}

TEST(Hitting, FullDimensionalAgreesWithRadialOracle) {
  const double delta = 9.0, eps = 0.05, dt = 2.5e-4, T = 0.5;
  const std::size_t M = 20000;
  auto s = spec_of(M, dt, T, 21);
  s.x0 = {0.5, 0.0, 0.0};
  s.jobs = 0;
  const auto full = simulate(mollified_inverse_square(delta, 100), s);
  const auto hf = hitting_probability(full, eps);
  const auto o = radial_oracle(3, delta, 0.5, eps, dt, T, M, 21);
  const double joint = std::hypot(hf.ci95, o.stats.ci95);
  EXPECT_LT(std::abs(hf.p_hat - o.stats.p_hat), joint + 0.01) << hf.p_hat << " " << o.stats.p_hat;
  const double ks = ks_distance(surviving_radii(full, eps), o.survivors);
  EXPECT_LT(ks, 0.04);
}

TEST(Martingale, DriftlessDefectWithinNoise) {
  auto s = spec_of(20000, 1e-3, 0.5);
  const auto phi = pde::make_poly_bump(3, 1.0, 1.0, {0.25, 0.0, 0.0, 0.0});
  for (auto g : {GFunctional::one, GFunctional::clip_phi, GFunctional::clip_mean}) {
    const auto m = martingale_defect(nullptr, s, phi, 0.25, 0.5, g);
    EXPECT_GT(m.stderr_, 0.0);
    EXPECT_LT(std::abs(m.defect), 3.0 * m.stderr_) << to_string(g);
  }
}

TEST(Martingale, ConstantDriftDefectWithinNoise) {
  auto s = spec_of(20000, 1e-3, 0.5);
  const auto b = drift::make_bounded_smooth(3, {2.0, 0.0, 0.0}, 0.5);
  const auto phi = pde::make_gaussian(3, 1.0, 0.4);
  const auto m = martingale_defect(b, s, phi, 0.1, 0.4, GFunctional::clip_phi);
  EXPECT_LT(std::abs(m.defect), 3.0 * m.stderr_);
}

TEST(Martingale, WrongDriftIsDetected) {
  // Evaluating the generator with the wrong drift leaves a visible bias.
  auto s = spec_of(20000, 1e-3, 0.5);
  s.x0 = {0.3, 0.0, 0.0};
  const auto b = drift::make_bounded_smooth(3, {4.0, 0.0, 0.0}, INFINITY);
  const auto phi = pde::make_gaussian(3, 1.0, 0.4);
  const auto m = martingale_defect(b, s, phi, 0.0, 0.5, GFunctional::one, drift::make_zero(3));
  EXPECT_GT(std::abs(m.defect), 5.0 * m.stderr_);
}

TEST(Martingale, Validation) {
  auto s = spec_of(10, 1e-2, 0.5);
  const auto phi = pde::make_gaussian(3, 1.0, 0.4);
  EXPECT_THROW(martingale_defect(nullptr, s, phi, 0.3, 0.2, GFunctional::one), Error);
  EXPECT_THROW(martingale_defect(nullptr, s, phi, 0.1, 0.6, GFunctional::one), Error);
  EXPECT_THROW(martingale_defect(nullptr, s, pde::make_gaussian(2, 1.0, 0.4), 0.1, 0.2, GFunctional::one), Error);
  EXPECT_EQ(g_from_string("clip-mean"), GFunctional::clip_mean);
  EXPECT_THROW(g_from_string("nope"), Error);
}

TEST(Krylov, ZeroFieldIsDegenerate) {
  auto s = spec_of(256, 1e-2, 0.5);
  const auto k = krylov_statistic(nullptr, s, drift::make_zero(3), nullptr, 2.5, 1.25, {{0.0, 0.25}},
                                  energy::Weight::standard(3));
  ASSERT_EQ(k.size(), 1u);
  EXPECT_EQ(k[0].lhs, 0.0);
  EXPECT_TRUE(k[0].degenerate);
}

TEST(Krylov, ConstantMagnitudeLhsIsExact) {
  auto s = spec_of(256, 1e-2, 0.5);
  const auto b = drift::make_bounded_smooth(3, {0.0, 3.0, 4.0}, INFINITY);
  const auto k = krylov_statistic(b, s, nullptr, nullptr, 2.5, 1.25, {{0.0, 0.25}, {0.1, 0.5}},
                                  energy::Weight::standard(3));
  EXPECT_NEAR(k[0].lhs, 5.0 * 0.25, 1e-12);
  EXPECT_NEAR(k[1].lhs, 5.0 * 0.4, 1e-12);
  EXPECT_LT(k[1].lhs_stderr, 1e-12);
}

TEST(Krylov, RhsMatchesRadialQuadrature) {
  // |h| = 2 everywhere, so chi = 1; f a centered bump, rho standard. The sup over z is at 0.
  const double p = 2.5, theta = 1.25, tp = theta / (theta - 1.0), e = p * tp;
  const auto h = drift::make_bounded_smooth(3, {2.0, 0.0, 0.0}, INFINITY);
  const auto f = pde::make_poly_bump(3, 1.0, 0.75);
  const auto rho = energy::Weight::standard(3);
  KrylovGrid grid;
  grid.L = 1.0;
  grid.h = 0.025;
  const double got = krylov_rhs(h, f, 3, p, theta, {0.0, 0.5}, rho, grid);
  const auto& rule = gauss_legendre(20);
  double acc = 0.0;
  for (int k = 0; k < 32; ++k)
    acc += integrate(rule, 0.75 * k / 32, 0.75 * (k + 1) / 32, [&](double r) {
      const double q = 1.0 - r * r / 0.5625;
      return r * r * std::pow(q, 4.0 * e) * std::pow(1.0 + rho.kappa() * r * r, -2.0 * rho.beta());
    });
  const double exact = std::pow(0.5 * 4.0 * std::numbers::pi * acc, 1.0 / e);
  EXPECT_NEAR(got, exact, 2e-3 * exact);
}

TEST(Krylov, FittedConstantStableAcrossWindows) {
  auto s = spec_of(4000, 2e-3, 0.75, 5);
  s.x0 = {0.5, 0.0, 0.0};
  s.jobs = 0;
  const auto b = mollified_inverse_square(1.0, 8);
  KrylovGrid grid;
  grid.h = 0.1;
  const auto k = krylov_statistic(b, s, nullptr, nullptr, 2.5, 1.25, {{0.0, 0.25}, {0.0, 0.5}, {0.25, 0.75}},
                                  energy::Weight::standard(3), grid);
  double lo = INFINITY, hi = 0.0;
  for (const auto& r : k) {
    EXPECT_FALSE(r.degenerate);
    lo = std::min(lo, r.fitted_C);
    hi = std::max(hi, r.fitted_C);
  }
  EXPECT_LT(hi / lo, 2.0);
}

TEST(Krylov, ScalingOfConstantMagnitudeIsLinear) {
  auto s = spec_of(256, 1e-2, 0.8);
  const auto b = drift::make_bounded_smooth(3, {1.0, 0.0, 0.0}, INFINITY);
  const auto r = drift_integral_scaling(b, s, {{0.0, 0.1}, {0.0, 0.2}, {0.0, 0.4}, {0.0, 0.8}});
  EXPECT_NEAR(r.fit.mu, 1.0, 1e-9);
  EXPECT_NEAR(r.fit.r2, 1.0, 1e-9);
}

TEST(Krylov, ScalingOfMollifiedInverseSquareIsSublinear) {
  auto s = spec_of(2000, 2e-3, 0.8, 9);
  s.x0 = {0.5, 0.0, 0.0};
  s.jobs = 0;
  const auto r = drift_integral_scaling(mollified_inverse_square(1.0, 8), s,
                                        {{0.0, 0.05}, {0.0, 0.1}, {0.0, 0.2}, {0.0, 0.4}, {0.0, 0.8}});
  EXPECT_GT(r.fit.mu, 0.3);
  EXPECT_LT(r.fit.mu, 1.0);
  EXPECT_GT(r.fit.r2, 0.95);
}
