#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "sslab/core/gauss.hpp"
#include "sslab/simd/fastmath.hpp"
#include "sslab/simd/kernels.hpp"
#include "sslab/simd/philox.hpp"

using namespace sslab::simd;

namespace {

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

class Avx2 : public ::testing::Test {
 protected:
  void SetUp() override {
    avx = avx2_kernels();
    if (!avx) GTEST_SKIP() << "no AVX2 on this CPU";
  }
  const KernelTable& ref = scalar_kernels();
  const KernelTable* avx = nullptr;
};

}  // namespace

// Random123 known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswers) {
  auto r = philox4x32_10({0, 0, 0, 0}, 0, 0);
  EXPECT_EQ(r, (std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  r = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, 0xffffffffu, 0xffffffffu);
  EXPECT_EQ(r, (std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  r = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, 0xa4093822u, 0x299f31d0u);
  EXPECT_EQ(r, (std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(FastMath, LogAccuracy) {
  for (double x = 1e-300; x < 1e300; x *= 1.37) EXPECT_NEAR(fastmath::log_pos(x), std::log(x), 4e-15 * std::max(1.0, std::abs(std::log(x))));
  for (std::uint32_t w : {0u, 1u, 77u, 0x7fffffffu, 0xfffffffeu, 0xffffffffu}) {
    const double u = fastmath::uniform_open(w);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_NEAR(fastmath::log_pos(u), std::log(u), 1e-14);
  }
}

TEST(FastMath, SinCosAccuracy) {
  for (int i = 0; i <= 10000; ++i) {
    const double u = i / 10000.0;
    double c, s;
    fastmath::sincos_2pi(u, c, s);
    EXPECT_NEAR(c, std::cos(2 * M_PI * u), 2e-15);
    EXPECT_NEAR(s, std::sin(2 * M_PI * u), 2e-15);
  }
}

TEST(Normals, Moments) {
  const std::size_t n = 1 << 16;
  std::vector<double> p[4];
  double* planes[4];
  for (int w = 0; w < 4; ++w) {
    p[w].resize(n);
    planes[w] = p[w].data();
  }
  scalar_kernels().normals4(42, 3, 0, 0, n, planes);
  double m1 = 0, m2 = 0, m4 = 0, c01 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int w = 0; w < 4; ++w) {
      const double x = p[w][i];
      m1 += x;
      m2 += x * x;
      m4 += x * x * x * x;
    }
    c01 += p[0][i] * p[1][i];
  }
  const double N = 4.0 * n;
  EXPECT_NEAR(m1 / N, 0.0, 4.0 / std::sqrt(N));
  EXPECT_NEAR(m2 / N, 1.0, 4.0 * std::sqrt(2.0 / N));
  EXPECT_NEAR(m4 / N, 3.0, 4.0 * std::sqrt(96.0 / N));
  EXPECT_NEAR(c01 / n, 0.0, 4.0 / std::sqrt(double(n)));
}

TEST(Normals, CounterIndependentOfBlocking) {
  const std::size_t n = 37;
  std::vector<double> a[4], b[4];
  double* pa[4];
  double* pb[4];
  for (int w = 0; w < 4; ++w) {
    a[w].resize(n);
    b[w].resize(n);
    pa[w] = a[w].data();
    pb[w] = b[w].data();
  }
  active_kernels().normals4(9, 1, 0, 100, n, pa);
  for (std::size_t i = 0; i < n; ++i) {
    double* one[4] = {pb[0] + i, pb[1] + i, pb[2] + i, pb[3] + i};
    scalar_kernels().normals4(9, 1, 0, 100 + i, 1, one);
  }
  for (int w = 0; w < 4; ++w) EXPECT_TRUE(bits_equal(a[w], b[w]));
}

TEST(Gauss, MatchesPolynomialExactness) {
  for (int n : {1, 2, 5, 20, 33}) {
    const auto& g = sslab::gauss_legendre(n);
    for (int k = 0; k < 2 * n; ++k) {
      const double v = sslab::integrate(g, 0.0, 1.0, [&](double x) { return std::pow(x, k); });
      EXPECT_NEAR(v, 1.0 / (k + 1), 1e-14) << n << " " << k;
    }
  }
}

TEST_F(Avx2, Philox) {
  const std::size_t n = 103;
  std::vector<std::uint32_t> c[4], o1[4], o2[4];
  const std::uint32_t* cp[4];
  std::uint32_t* p1[4];
  std::uint32_t* p2[4];
  for (int w = 0; w < 4; ++w) {
    c[w].resize(n);
    o1[w].resize(n);
    o2[w].resize(n);
    for (std::size_t i = 0; i < n; ++i) c[w][i] = static_cast<std::uint32_t>(i * 2654435761u + w * 97u);
    cp[w] = c[w].data();
    p1[w] = o1[w].data();
    p2[w] = o2[w].data();
  }
  ref.philox(cp, 0xdeadbeefu, 0x12345678u, n, p1);
  avx->philox(cp, 0xdeadbeefu, 0x12345678u, n, p2);
  for (int w = 0; w < 4; ++w) EXPECT_EQ(o1[w], o2[w]);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = philox4x32_10({c[0][i], c[1][i], c[2][i], c[3][i]}, 0xdeadbeefu, 0x12345678u);
    EXPECT_EQ(r[2], o1[2][i]);
  }
}

TEST_F(Avx2, Normals) {
  for (std::size_t n : {1u, 4u, 7u, 1000u}) {
    std::vector<double> a[4], b[4];
    double* pa[4];
    double* pb[4];
    for (int w = 0; w < 4; ++w) {
      a[w].resize(n);
      b[w].resize(n);
      pa[w] = a[w].data();
      pb[w] = b[w].data();
    }
    ref.normals4(77, 12, 5, 3, n, pa);
    avx->normals4(77, 12, 5, 3, n, pb);
    for (int w = 0; w < 4; ++w) EXPECT_TRUE(bits_equal(a[w], b[w]));
  }
}

TEST_F(Avx2, Reductions) {
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 1001u}) {
    std::vector<double> x(n), y(n), y2;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::sin(0.37 * i) * 1e3;
      y[i] = std::cos(1.1 * i) / (i + 1.0);
    }
    const double d1 = ref.dot(x.data(), y.data(), n), d2 = avx->dot(x.data(), y.data(), n);
    EXPECT_EQ(std::memcmp(&d1, &d2, sizeof d1), 0);
    y2 = y;
    ref.axpy(0.3, x.data(), y.data(), n);
    avx->axpy(0.3, x.data(), y2.data(), n);
    EXPECT_TRUE(bits_equal(y, y2));
    ref.xpby(x.data(), -1.7, y.data(), n);
    avx->xpby(x.data(), -1.7, y2.data(), n);
    EXPECT_TRUE(bits_equal(y, y2));
    std::vector<double> o1(n), o2(n);
    ref.mul(x.data(), y.data(), o1.data(), n);
    avx->mul(x.data(), y.data(), o2.data(), n);
    EXPECT_TRUE(bits_equal(o1, o2));
  }
}

TEST_F(Avx2, RadialDriftAndTable) {
  std::vector<double> tv(6 * 17);
  for (std::size_t i = 0; i < tv.size(); ++i) tv[i] = std::sqrt(i + 1.0) - 0.3 * i;
  const RadialTableView tb{tv.data(), 0.07, 16, 6};
  const std::size_t n = 515;
  std::vector<double> X[3], B1[3], B2[3];
  const double* xp[3];
  double* b1[3];
  double* b2[3];
  for (int q = 0; q < 3; ++q) {
    X[q].resize(n);
    B1[q].resize(n);
    B2[q].resize(n);
    for (std::size_t i = 0; i < n; ++i) X[q][i] = std::sin(i * (q + 1.3)) * 3.0 * (i % 23) / 23.0;
    xp[q] = X[q].data();
    b1[q] = B1[q].data();
    b2[q] = B2[q].data();
  }
  for (int q = 0; q < 3; ++q) X[q][8] = 0.0;
  X[0][9] = NAN;
  ref.radial_drift(tb, 0.8, 3, n, xp, b1);
  avx->radial_drift(tb, 0.8, 3, n, xp, b2);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 9) continue;
    for (int q = 0; q < 3; ++q) EXPECT_EQ(std::memcmp(&B1[q][i], &B2[q][i], 8), 0) << i;
  }
  // Table lookup reproduces nodes and interpolates linearly.
  EXPECT_DOUBLE_EQ(radial_table_eval(tb, 0.0), tv[0]);
  EXPECT_NEAR(radial_table_eval(tb, 0.07 * 2.0), tv[2 * 17], 1e-12);
  EXPECT_NEAR(radial_table_eval(tb, 0.07 * 1.5), 0.5 * (tv[17 + 8] + tv[17 + 8]), 1e-12);
  EXPECT_EQ(radial_table_eval(tb, 1e9), 0.0);
  RadialTableView cut = tb;
  cut.r_max = 0.5;
  EXPECT_EQ(radial_table_eval(cut, 0.5), 0.0);
  EXPECT_EQ(radial_table_eval(cut, 0.49), radial_table_eval(tb, 0.49));
  std::vector<double> C1[3], C2[3];
  double* c1[3];
  double* c2[3];
  for (int q = 0; q < 3; ++q) {
    C1[q].resize(n);
    C2[q].resize(n);
    c1[q] = C1[q].data();
    c2[q] = C2[q].data();
  }
  ref.radial_drift(cut, 1.0, 3, n, xp, c1);
  avx->radial_drift(cut, 1.0, 3, n, xp, c2);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 9) continue;
    for (int q = 0; q < 3; ++q) EXPECT_EQ(std::memcmp(&C1[q][i], &C2[q][i], 8), 0) << i;
  }
}

TEST_F(Avx2, EmStep) {
  const int d = 5;
  const std::size_t n = 259;
  std::vector<double> Xa[d], Xb[d], B[d];
  double* xa[d];
  double* xb[d];
  const double* bp[d];
  for (int q = 0; q < d; ++q) {
    Xa[q].resize(n);
    B[q].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      Xa[q][i] = std::cos(i * 0.1 + q);
      B[q][i] = (i % 11 == 0) ? 400.0 : std::sin(i * 0.3 * q);
    }
    Xb[q] = Xa[q];
    xa[q] = Xa[q].data();
    xb[q] = Xb[q].data();
    bp[q] = B[q].data();
  }
  std::vector<double> m1(n, 1e9), m2(n, 1e9);
  std::vector<std::uint32_t> c1(n), c2(n);
  std::vector<std::uint8_t> f1(n), f2(n);
  for (std::uint64_t st = 0; st < 20; ++st) {
    ref.em_step(EmStepArgs{d, n, xa, bp, 1e-3, 0.2, 5, st, 1000, m1.data(), c1.data(), f1.data()});
    avx->em_step(EmStepArgs{d, n, xb, bp, 1e-3, 0.2, 5, st, 1000, m2.data(), c2.data(), f2.data()});
  }
  for (int q = 0; q < d; ++q) EXPECT_TRUE(bits_equal(Xa[q], Xb[q]));
  EXPECT_TRUE(bits_equal(m1, m2));
  EXPECT_EQ(c1, c2);
  EXPECT_EQ(f1, f2);
  unsigned caps = 0;
  for (auto c : c1) caps += c;
  EXPECT_GT(caps, 0u);
}

TEST_F(Avx2, Stencil) {
  const std::size_t nx = 13, ny = 11, nz = 9;
  const std::ptrdiff_t sy = nz, sx = static_cast<std::ptrdiff_t>(ny * nz);
  const std::size_t total = nx * ny * nz;
  std::vector<double> u(total), diag(total), lo[3], up[3];
  for (std::size_t i = 0; i < total; ++i) {
    u[i] = std::sin(0.01 * i);
    diag[i] = 1.0 + 0.001 * i;
  }
  StencilView op;
  op.d = 3;
  op.stride = {sx, sy, 1, 0};
  op.diag = diag.data() + sx;
  for (int a = 0; a < 3; ++a) {
    lo[a].resize(total);
    up[a].resize(total);
    for (std::size_t i = 0; i < total; ++i) {
      lo[a][i] = -0.1 * (a + 1) + 1e-4 * i;
      up[a][i] = -0.2 + 1e-5 * i;
    }
    op.lower[a] = lo[a].data() + sx;
    op.upper[a] = up[a].data() + sx;
  }
  op.n = total - 2 * sx;
  std::vector<double> y1(op.n), y2(op.n);
  ref.stencil_apply(op, u.data() + sx, y1.data());
  avx->stencil_apply(op, u.data() + sx, y2.data());
  EXPECT_TRUE(bits_equal(y1, y2));
}

TEST_F(Avx2, TranslateWeightedSum) {
  const std::size_t n = 1234;
  std::vector<double> c[3], v(n);
  PointCloudView pts;
  pts.d = 3;
  pts.n = n;
  for (int a = 0; a < 3; ++a) {
    c[a].resize(n);
    for (std::size_t i = 0; i < n; ++i) c[a][i] = std::sin(i * (a + 0.7));
    pts.coord[a] = c[a].data();
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 / (1.0 + i);
  pts.value = v.data();
  const double z[3] = {0.5, -1.0, 2.0};
  for (int power : {0, 1, 2, 3}) {
    const double a = ref.translate_weighted_sum(pts, z, 0.01, power);
    const double b = avx->translate_weighted_sum(pts, z, 0.01, power);
    EXPECT_EQ(std::memcmp(&a, &b, 8), 0) << power;
  }
}

TEST(Dispatch, Override) {
  EXPECT_EQ(scalar_kernels().isa, Isa::scalar);
  EXPECT_EQ(to_string(Isa::avx2), "avx2");
  EXPECT_EQ(avx2_kernels() != nullptr, cpu_has_avx2());
}
