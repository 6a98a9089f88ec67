#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "sslab/core/error.hpp"
#include "sslab/drift/drift_field.hpp"
#include "sslab/drift/mollify.hpp"
#include "sslab/pde/duhamel_oracle.hpp"
#include "sslab/pde/solution_io.hpp"
#include "sslab/pde/solver.hpp"

using namespace sslab;
using namespace sslab::pde;

namespace {

Grid make_grid(double h, double tau, double T, double L = 2.0, int d = 3) {
  Grid g;
  g.d = d;
  g.L = L;
  g.h = h;
  g.tau = tau;
  g.T = T;
  return g;
}

SourceSpec gaussian_source(int d, double sigma) {
  std::vector<double> e(static_cast<std::size_t>(d), 0.0);
  e[0] = 1.0;
  return SourceSpec{drift::make_bounded_smooth(d, e, INFINITY), make_gaussian(d, 1.0, sigma)};
}

double duhamel_error(double h, double tau, double T, double sigma, std::array<double, 4> c = {}) {
  const auto grid = make_grid(h, tau, T);
  drift::DriftPtr b;
  if (c[0] != 0.0 || c[1] != 0.0 || c[2] != 0.0) b = drift::make_bounded_smooth(3, {c[0], c[1], c[2]}, INFINITY);
  SolveOptions opt;
  opt.save_every = static_cast<std::size_t>(grid.steps());
  const auto sol = solve_cauchy(b, gaussian_source(3, sigma), grid, opt);
  const auto oracle = gaussian_oracle(3, 1.0, sigma, {}, c);
  const auto ref = oracle_on_grid(oracle, grid, T);
  return relative_linf_on_ball(grid, sol.frame(sol.frame_count() - 1), ref, 1.0);
}

}  // namespace

TEST(Oracle, DenseSumMatchesClosedForm) {
  const auto o = gaussian_oracle(3, 1.3, 0.35, {0.1, 0, -0.2, 0}, {0.4, -0.3, 0.0, 0});
  for (double t : {0.05, 0.25}) {
    for (auto x : {std::array<double, 3>{0, 0, 0}, {0.5, -0.3, 0.2}, {1.0, 0.1, -0.7}}) {
      const double a = o.value(t, x.data());
      const double b = gaussian_duhamel_closed_form(3, 1.3, 0.35, {0.1, 0, -0.2, 0}, {0.4, -0.3, 0, 0}, t, x.data());
      EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(b)));
    }
  }
  const auto grid = make_grid(0.25, 0.05, 0.25);
  const auto on = oracle_on_grid(o, grid, 0.2);
  double x[3];
  for (std::size_t i = 0; i < on.size(); i += 37) {
    grid.position(i, x);
    EXPECT_NEAR(on[i], o.value(0.2, x), 1e-13);
  }
}

TEST(Grid, Validation) {
  EXPECT_THROW(make_grid(0.1, 0.01, 0.25, 1.5).validate(), Error);
  EXPECT_THROW(make_grid(-0.1, 0.01, 0.25).validate(), Error);
  EXPECT_THROW(make_grid(0.15, 0.01, 0.25).validate(), Error);
  try {
    make_grid(0.5, 0.01, 0.25, 2.0, 5).validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_dimension);
  }
  const auto g = make_grid(0.5, 0.05, 0.25);
  EXPECT_EQ(g.cells(), 8);
  EXPECT_EQ(g.node_count(), 729u);
  EXPECT_EQ(g.steps(), 5);
  EXPECT_TRUE(g.is_boundary(0));
  EXPECT_FALSE(g.is_boundary(364));
  double x[3];
  g.position(364, x);
  EXPECT_DOUBLE_EQ(x[0], 0.0);
  EXPECT_DOUBLE_EQ(x[2], 0.0);
}

TEST(Solver, ZeroSourceZeroSolution) {
  const auto grid = make_grid(0.2, 0.02, 0.1);
  const SourceSpec src{drift::make_zero(3), make_gaussian(3, 1.0, 0.3)};
  const auto sol = solve_cauchy(nullptr, src, grid);
  EXPECT_EQ(sol.frame_count(), 6u);
  for (std::size_t k = 0; k < sol.frame_count(); ++k)
    for (double v : sol.frame(k)) EXPECT_EQ(v, 0.0);
}

TEST(Solver, DuhamelRefinement) {
  const double e1 = duhamel_error(0.1, 0.025, 0.25, 0.4);
  const double e2 = duhamel_error(0.1, 0.0125, 0.25, 0.4);
  EXPECT_LT(e2, e1);
  EXPECT_GE(std::log2(e1 / e2), 1.0) << e1 << " " << e2;
  EXPECT_LT(e2, 3e-2);
}

TEST(Solver, GalileanShift) {
  const double e = duhamel_error(0.1, 0.005, 0.25, 0.4, {0.5, -0.25, 0.0, 0.0});
  EXPECT_LT(e, 2e-2);
}

TEST(Solver, TerminalMatchesBackwardOracle) {
  const auto grid = make_grid(0.1, 0.01, 0.25);
  const double t1 = 0.5;
  SolveOptions opt;
  opt.save_every = 5;
  const auto sol = solve_terminal(nullptr, make_gaussian(3, 1.0, 0.4), grid, t1, opt);
  ASSERT_NEAR(sol.time(sol.frame_count() - 1), t1, 1e-12);
  ASSERT_NEAR(sol.time(0), t1 - 0.25, 1e-12);
  for (double v : sol.frame(sol.frame_count() - 1)) EXPECT_EQ(v, 0.0);
  const auto oracle = gaussian_oracle(3, 1.0, 0.4);
  const auto ref = oracle_on_grid(oracle, grid, 0.25);
  EXPECT_LT(relative_linf_on_ball(grid, sol.frame(0), ref, 1.0), 2e-2);
  const auto zero = solve_terminal(nullptr, make_constant(3, 0.0), grid, t1, opt);
  for (double v : zero.frame(0)) EXPECT_EQ(v, 0.0);
}

TEST(Solver, TerminalIsTimeReversedCauchy) {
  const auto grid = make_grid(0.2, 0.02, 0.2);
  auto b = drift::mollify(drift::make_inverse_square(3, 1.0), drift::MollificationSchedule::standard(4));
  auto F = make_poly_bump(3, 1.0, 0.75);
  const auto term = solve_terminal(b, F, grid, 0.3);
  // Reversed problem: d_s v - Lap v + (-b) . grad v = F.
  struct Neg : drift::DriftField {
    drift::DriftPtr inner;
    explicit Neg(drift::DriftPtr p) : DriftField(drift::DriftKind::difference, 3, {}, false), inner(std::move(p)) {}
    void eval(double t, const double* x, double* o) const override {
      inner->eval(t, x, o);
      for (int a = 0; a < 3; ++a) o[a] = -o[a];
    }
    std::string id() const override { return "neg"; }
  };
  auto neg = std::make_shared<Neg>(b);
  std::vector<double> e(3, 0.0);
  e[0] = 1.0;
  const auto fwd = solve_cauchy(neg, SourceSpec{drift::make_bounded_smooth(3, e, INFINITY), F}, grid);
  ASSERT_EQ(fwd.frame_count(), term.frame_count());
  const std::size_t K = term.frame_count();
  for (std::size_t k = 0; k < K; ++k) {
    const auto& a = term.frame(k);
    const auto& c = fwd.frame(K - 1 - k);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], c[i], 1e-10);
  }
}

TEST(Solver, MaximumPrinciple) {
  const auto grid = make_grid(0.1, 0.01, 0.2);
  auto b = drift::mollify(drift::make_inverse_square(3, 9.0), drift::MollificationSchedule::standard(8));
  SolveOptions opt;
  opt.initial = make_poly_bump(3, 1.0, 0.8, {0.3, 0, 0, 0});
  const auto sol = solve_cauchy(b, SourceSpec{drift::make_zero(3), make_constant(3, 0.0)}, grid, opt);
  EXPECT_GE(sol.min_value(), -1e-12);
  EXPECT_LE(sol.max_value(), 1.0 + 1e-12);
  EXPECT_GT(sol.max_value(), 0.1);
}

TEST(Solver, Determinism) {
  const auto grid = make_grid(0.2, 0.02, 0.1);
  auto b = drift::mollify(drift::make_inverse_square(3, 1.0), drift::MollificationSchedule::standard(4));
  const auto src = gaussian_source(3, 0.3);
  const auto a = solve_cauchy(b, src, grid);
  const auto c = solve_cauchy(b, src, grid);
  for (std::size_t k = 0; k < a.frame_count(); ++k)
    EXPECT_EQ(std::memcmp(a.frame(k).data(), c.frame(k).data(), a.frame(k).size() * sizeof(double)), 0);
}

TEST(Solver, ExplicitStepping) {
  auto grid = make_grid(0.2, 0.01, 0.1);
  grid.stepping = Stepping::explicit_euler;
  try {
    solve_cauchy(nullptr, gaussian_source(3, 0.4), grid);
    FAIL();
  } catch (const StabilityViolation& e) {
    EXPECT_LE(e.suggested_tau(), 0.2 * 0.2 / 6.0);
    EXPECT_GT(e.suggested_tau(), 0.0);
  }
  grid.tau = 0.005;
  const auto ex = solve_cauchy(nullptr, gaussian_source(3, 0.4), grid);
  grid.stepping = Stepping::implicit_euler;
  const auto im = solve_cauchy(nullptr, gaussian_source(3, 0.4), grid);
  EXPECT_LT(relative_linf_on_ball(grid, ex.frame(ex.frame_count() - 1), im.frame(im.frame_count() - 1), 1.0), 0.05);
}

TEST(Solver, PecletWarning) {
  const auto grid = make_grid(0.2, 0.02, 0.04);
  auto b = drift::make_bounded_smooth(3, {30.0, 0.0, 0.0}, INFINITY);
  const auto sol = solve_cauchy(b, gaussian_source(3, 0.4), grid);
  ASSERT_FALSE(sol.warnings().empty());
  EXPECT_NE(sol.warnings()[0].find("peclet"), std::string::npos);
}

TEST(Residual, ExactDiscreteSolution) {
  const auto grid = make_grid(0.2, 0.02, 0.1);
  auto b = drift::mollify(drift::make_inverse_square(3, 1.0), drift::MollificationSchedule::standard(4));
  const auto src = gaussian_source(3, 0.3);
  const auto sol = solve_cauchy(b, src, grid);
  EXPECT_LT(residual_norm(sol, b, src), 1e-9);
}

TEST(Residual, ManufacturedSolution) {
  auto b = drift::make_bounded_smooth(3, {0.6, -0.3, 0.2}, 0.8);
  auto phi = make_poly_bump(3, 1.0, 1.2);
  auto f = make_function(
      3,
      [b, phi](double t, const double* x) {
        double g[3], bv[3];
        phi->gradient(t, x, g);
        b->eval(t, x, bv);
        return phi->value(t, x) - t * phi->laplacian(t, x) + t * (bv[0] * g[0] + bv[1] * g[1] + bv[2] * g[2]);
      },
      "manufactured", 50.0);
  const SourceSpec src{drift::make_bounded_smooth(3, {1.0, 0.0, 0.0}, INFINITY), f};
  auto residual_at = [&](double h, double tau) {
    const auto grid = make_grid(h, tau, 0.2);
    GridSolution u(grid);
    for (int k = 0; k <= grid.steps(); ++k) {
      const double t = k * tau;
      auto frame = sample_function(*make_function(
                                       3, [phi, t](double, const double* x) { return t * phi->value(t, x); }, "u*", 1.0),
                                   grid, t);
      u.push_frame(t, std::move(frame));
    }
    return residual_norm(u, b, src);
  };
  const double r1 = residual_at(0.2, 0.04);
  const double r2 = residual_at(0.1, 0.02);
  EXPECT_GE(r1 / r2, 1.5) << r1 << " " << r2;
}

TEST(Residual, LinearInPerturbation) {
  const auto grid = make_grid(0.2, 0.02, 0.1);
  const auto src = gaussian_source(3, 0.3);
  const auto sol = solve_cauchy(nullptr, src, grid);
  auto perturbed = [&](double a) {
    GridSolution p = sol;
    for (std::size_t k = 1; k < p.frame_count(); ++k) {
      auto& fr = p.frame(k);
      for (std::size_t i = 0; i < fr.size(); ++i)
        if (!grid.is_boundary(i)) fr[i] += a * std::sin(0.37 * i + k);
    }
    return residual_norm(p, nullptr, src);
  };
  const double r1 = perturbed(1e-3), r2 = perturbed(2e-3), r4 = perturbed(4e-3);
  EXPECT_NEAR(r2 / r1, 2.0, 1e-3);
  EXPECT_NEAR(r4 / r1, 4.0, 1e-3);
}

TEST(Residual, NeedsConsecutiveFrames) {
  const auto grid = make_grid(0.2, 0.02, 0.1);
  SolveOptions opt;
  opt.save_every = 5;
  const auto sol = solve_cauchy(nullptr, gaussian_source(3, 0.3), grid, opt);
  EXPECT_THROW(residual_norm(sol, nullptr, gaussian_source(3, 0.3)), Error);
}

TEST(SolutionIo, BinaryRoundTripAndHeader) {
  const auto grid = make_grid(0.25, 0.05, 0.1);
  const auto sol = solve_cauchy(nullptr, gaussian_source(3, 0.3), grid);
  const auto path = (std::filesystem::temp_directory_path() / "sslab_io_test.bin").string();
  write_binary(sol, path);
  std::ifstream in(path, std::ios::binary);
  char head[kHeaderBytes];
  in.read(head, kHeaderBytes);
  EXPECT_EQ(std::memcmp(head, "KGSOL1\0\0", 8), 0);
  std::uint32_t d, nt, dims[4];
  std::memcpy(&d, head + 8, 4);
  std::memcpy(&nt, head + 12, 4);
  std::memcpy(dims, head + 16, 16);
  EXPECT_EQ(d, 3u);
  EXPECT_EQ(nt, 3u);
  EXPECT_EQ(dims[0], 17u);
  EXPECT_EQ(dims[3], 1u);
  double hh;
  std::memcpy(&hh, head + 32, 8);
  EXPECT_EQ(hh, 0.25);
  EXPECT_EQ(std::filesystem::file_size(path), kHeaderBytes + 3 * 17 * 17 * 17 * sizeof(double) + 3 * sizeof(double));
  const auto back = read_binary(path);
  ASSERT_EQ(back.frame_count(), sol.frame_count());
  for (std::size_t k = 0; k < sol.frame_count(); ++k) {
    EXPECT_EQ(back.time(k), sol.time(k));
    EXPECT_EQ(back.frame(k), sol.frame(k));
  }
  std::filesystem::remove(path);
}

TEST(SolutionIo, Csv) {
  const auto grid = make_grid(0.5, 0.05, 0.05);
  const auto sol = solve_cauchy(nullptr, gaussian_source(3, 0.3), grid);
  const auto path = (std::filesystem::temp_directory_path() / "sslab_io_test.csv").string();
  write_csv(sol, path, "# manifest=abc version=0.1.0");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# manifest=abc version=0.1.0");
  std::getline(in, line);
  EXPECT_EQ(line, "t,x1,x2,x3,u");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2u * 729u);
  std::filesystem::remove(path);
}
