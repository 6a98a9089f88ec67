// AVX2 mirror of kernels_scalar.cpp. Four doubles (or four 64-bit lanes holding
// 32-bit words) per register; every arithmetic step matches the scalar order.

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "sslab/simd/fastmath.hpp"
#include "sslab/simd/kernels.hpp"
#include "sslab/simd/philox.hpp"

namespace sslab::simd {

namespace fm = fastmath;

namespace {

using Vd = __m256d;
using Vi = __m256i;

inline Vi mask32() { return _mm256_set1_epi64x(0xffffffffLL); }

struct PhiloxLanes {
  Vi c0, c1, c2, c3;
};

// Four independent Philox4x32-10 evaluations; each 64-bit lane carries one 32-bit word.
inline PhiloxLanes philox_lanes(PhiloxLanes c, std::uint32_t key0, std::uint32_t key1) {
  const Vi m0 = _mm256_set1_epi64x(kPhiloxM0);
  const Vi m1 = _mm256_set1_epi64x(kPhiloxM1);
  const Vi lo_mask = mask32();
  std::uint32_t k0 = key0;
  std::uint32_t k1 = key1;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    const Vi vk0 = _mm256_set1_epi64x(k0);
    const Vi vk1 = _mm256_set1_epi64x(k1);
    const Vi p0 = _mm256_mul_epu32(c.c0, m0);
    const Vi p1 = _mm256_mul_epu32(c.c2, m1);
    const Vi hi0 = _mm256_srli_epi64(p0, 32);
    const Vi lo0 = _mm256_and_si256(p0, lo_mask);
    const Vi hi1 = _mm256_srli_epi64(p1, 32);
    const Vi lo1 = _mm256_and_si256(p1, lo_mask);
    PhiloxLanes n;
    n.c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c.c1), vk0);
    n.c1 = lo1;
    n.c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c.c3), vk1);
    n.c3 = lo0;
    c = n;
  }
  return c;
}

// Exact conversion of non-negative integers < 2^52 held in 64-bit lanes.
inline Vd small_u64_to_double(Vi v) {
  const Vi magic_bits = _mm256_set1_epi64x(0x4330000000000000LL);
  const Vd magic = _mm256_castsi256_pd(magic_bits);
  return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(v, magic_bits)), magic);
}

inline Vd uniform_open(Vi w) {
  return _mm256_mul_pd(_mm256_add_pd(small_u64_to_double(w), _mm256_set1_pd(0.5)),
                       _mm256_set1_pd(fm::kTwoPow32Inv));
}

inline Vd log_pos(Vd x) {
  const Vi bits = _mm256_castpd_si256(x);
  const Vi expo = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7ff));
  Vd e = _mm256_sub_pd(small_u64_to_double(expo), _mm256_set1_pd(1023.0));
  Vd m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
                                             _mm256_set1_epi64x(0x3ff0000000000000LL)));
  const Vd big = _mm256_cmp_pd(m, _mm256_set1_pd(2.0 * fm::kSqrtHalf), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_blendv_pd(e, _mm256_add_pd(e, _mm256_set1_pd(1.0)), big);
  const Vd one = _mm256_set1_pd(1.0);
  const Vd s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const Vd z = _mm256_mul_pd(s, s);
  Vd p = _mm256_set1_pd(fm::kLogCoeff[10]);
  for (int k = 9; k >= 0; --k) p = _mm256_add_pd(_mm256_mul_pd(p, z), _mm256_set1_pd(fm::kLogCoeff[k]));
  return _mm256_add_pd(_mm256_mul_pd(e, _mm256_set1_pd(fm::kLn2)), _mm256_mul_pd(_mm256_add_pd(s, s), p));
}

inline void sincos_2pi(Vd u, Vd& c, Vd& s) {
  const Vd q = _mm256_round_pd(_mm256_mul_pd(u, _mm256_set1_pd(4.0)), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const Vd y = _mm256_sub_pd(u, _mm256_mul_pd(q, _mm256_set1_pd(0.25)));
  const Vd t = _mm256_mul_pd(y, _mm256_set1_pd(fm::kTwoPi));
  const Vd t2 = _mm256_mul_pd(t, t);
  Vd ps = _mm256_set1_pd(fm::kSinCoeff[8]);
  Vd pc = _mm256_set1_pd(fm::kCosCoeff[8]);
  for (int k = 7; k >= 0; --k) {
    ps = _mm256_add_pd(_mm256_mul_pd(ps, t2), _mm256_set1_pd(fm::kSinCoeff[k]));
    pc = _mm256_add_pd(_mm256_mul_pd(pc, t2), _mm256_set1_pd(fm::kCosCoeff[k]));
  }
  const Vd sn = _mm256_mul_pd(t, ps);
  const Vd cs = pc;
  const Vd quadrant = _mm256_sub_pd(
      q, _mm256_mul_pd(_mm256_set1_pd(4.0),
                       _mm256_floor_pd(_mm256_mul_pd(q, _mm256_set1_pd(0.25)))));
  const Vd neg_sn = _mm256_sub_pd(_mm256_setzero_pd(), sn);
  const Vd neg_cs = _mm256_sub_pd(_mm256_setzero_pd(), cs);
  const Vd is1 = _mm256_cmp_pd(quadrant, _mm256_set1_pd(1.0), _CMP_EQ_OQ);
  const Vd is2 = _mm256_cmp_pd(quadrant, _mm256_set1_pd(2.0), _CMP_EQ_OQ);
  const Vd is3 = _mm256_cmp_pd(quadrant, _mm256_set1_pd(3.0), _CMP_EQ_OQ);
  c = cs;
  s = sn;
  c = _mm256_blendv_pd(c, neg_sn, is1);
  s = _mm256_blendv_pd(s, cs, is1);
  c = _mm256_blendv_pd(c, neg_cs, is2);
  s = _mm256_blendv_pd(s, neg_sn, is2);
  c = _mm256_blendv_pd(c, sn, is3);
  s = _mm256_blendv_pd(s, neg_cs, is3);
}

inline void box_muller(Vi wa, Vi wb, Vd& n0, Vd& n1) {
  const Vd r = _mm256_sqrt_pd(_mm256_mul_pd(_mm256_set1_pd(-2.0), log_pos(uniform_open(wa))));
  Vd c;
  Vd s;
  sincos_2pi(uniform_open(wb), c, s);
  n0 = _mm256_mul_pd(r, c);
  n1 = _mm256_mul_pd(r, s);
}

inline PhiloxLanes path_counters(std::uint64_t step, std::uint32_t word1, std::uint64_t first_path) {
  const Vi lane = _mm256_set_epi64x(3, 2, 1, 0);
  const Vi path = _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(first_path)), lane);
  PhiloxLanes c;
  c.c0 = _mm256_set1_epi64x(static_cast<std::uint32_t>(step));
  c.c1 = _mm256_set1_epi64x(word1);
  c.c2 = _mm256_and_si256(path, mask32());
  c.c3 = _mm256_srli_epi64(path, 32);
  return c;
}

inline void normals4_lanes(std::uint64_t seed, std::uint64_t step, std::uint32_t word1, std::uint64_t first_path,
                           Vd out[4]) {
  const PhiloxLanes w = philox_lanes(path_counters(step, word1, first_path), static_cast<std::uint32_t>(seed),
                                     static_cast<std::uint32_t>(seed >> 32));
  box_muller(w.c0, w.c1, out[0], out[1]);
  box_muller(w.c2, w.c3, out[2], out[3]);
}

void philox_avx2(const std::uint32_t* const* ctr, std::uint32_t key0, std::uint32_t key1, std::size_t count,
                 std::uint32_t* const* out) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    PhiloxLanes c;
    c.c0 = _mm256_cvtepu32_epi64(_mm_loadu_si128(reinterpret_cast<const __m128i*>(ctr[0] + i)));
    c.c1 = _mm256_cvtepu32_epi64(_mm_loadu_si128(reinterpret_cast<const __m128i*>(ctr[1] + i)));
    c.c2 = _mm256_cvtepu32_epi64(_mm_loadu_si128(reinterpret_cast<const __m128i*>(ctr[2] + i)));
    c.c3 = _mm256_cvtepu32_epi64(_mm_loadu_si128(reinterpret_cast<const __m128i*>(ctr[3] + i)));
    const PhiloxLanes r = philox_lanes(c, key0, key1);
    const Vi lanes[4] = {r.c0, r.c1, r.c2, r.c3};
    for (int w = 0; w < 4; ++w) {
      alignas(32) std::uint64_t tmp[4];
      _mm256_store_si256(reinterpret_cast<Vi*>(tmp), lanes[w]);
      for (int l = 0; l < 4; ++l) out[w][i + static_cast<std::size_t>(l)] = static_cast<std::uint32_t>(tmp[l]);
    }
  }
  if (i < count) {
    const std::uint32_t* tail_ctr[4] = {ctr[0] + i, ctr[1] + i, ctr[2] + i, ctr[3] + i};
    std::uint32_t* tail_out[4] = {out[0] + i, out[1] + i, out[2] + i, out[3] + i};
    scalar_kernels().philox(tail_ctr, key0, key1, count - i, tail_out);
  }
}

void normals4_avx2(std::uint64_t seed, std::uint64_t step, std::uint32_t word1, std::uint64_t first_path,
                   std::size_t count, double* const* out) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    Vd n[4];
    normals4_lanes(seed, step, word1, first_path + i, n);
    for (int w = 0; w < 4; ++w) _mm256_storeu_pd(out[w] + i, n[w]);
  }
  if (i < count) {
    double* tail[4] = {out[0] + i, out[1] + i, out[2] + i, out[3] + i};
    scalar_kernels().normals4(seed, step, word1, first_path + i, count - i, tail);
  }
}

inline Vd radial_table_lanes(const RadialTableView& table, Vd r) {
  const Vd q = _mm256_div_pd(r, _mm256_set1_pd(table.width));
  const Vd k = _mm256_set1_pd(static_cast<double>(table.nodes_per_zone));
  const Vd inner = _mm256_cmp_pd(q, _mm256_set1_pd(1.0), _CMP_LT_OQ);
  const Vi bits = _mm256_castpd_si256(q);
  const Vi raw_exp = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7ff));
  Vi zone = _mm256_sub_epi64(raw_exp, _mm256_set1_epi64x(1022));
  zone = _mm256_castpd_si256(_mm256_blendv_pd(_mm256_castsi256_pd(zone), _mm256_setzero_pd(), inner));
  const Vd m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
                                                   _mm256_set1_epi64x(0x3ff0000000000000LL)));
  const Vd pos = _mm256_blendv_pd(_mm256_mul_pd(_mm256_sub_pd(m, _mm256_set1_pd(1.0)), k), _mm256_mul_pd(q, k), inner);
  // zone < zones (signed compare is fine: values are small and non-negative)
  const Vi in_range = _mm256_cmpgt_epi64(_mm256_set1_epi64x(table.zones), zone);
  const Vd ordered = _mm256_cmp_pd(q, q, _CMP_EQ_OQ);
  const Vd inside = _mm256_cmp_pd(r, _mm256_set1_pd(table.r_max), _CMP_LT_OQ);
  const Vd valid = _mm256_and_pd(_mm256_and_pd(_mm256_castsi256_pd(in_range), ordered), inside);
  Vd fl = _mm256_floor_pd(pos);
  fl = _mm256_min_pd(fl, _mm256_sub_pd(k, _mm256_set1_pd(1.0)));
  const Vd frac = _mm256_sub_pd(pos, fl);
  const Vi safe_zone = _mm256_and_si256(zone, _mm256_castpd_si256(valid));
  const Vd safe_fl = _mm256_and_pd(fl, valid);
  const Vi fl_i = _mm256_cvtepi32_epi64(_mm256_cvttpd_epi32(safe_fl));
  const Vi idx = _mm256_add_epi64(_mm256_mul_epu32(safe_zone, _mm256_set1_epi64x(table.nodes_per_zone + 1)), fl_i);
  const Vd v0 = _mm256_i64gather_pd(table.values, idx, 8);
  const Vd v1 = _mm256_i64gather_pd(table.values + 1, idx, 8);
  const Vd v = _mm256_add_pd(v0, _mm256_mul_pd(frac, _mm256_sub_pd(v1, v0)));
  return _mm256_and_pd(v, valid);
}

void radial_drift_avx2(const RadialTableView& table, double time_factor, int d, std::size_t count,
                       const double* const* x, double* const* b) {
  std::size_t i = 0;
  const Vd tf = _mm256_set1_pd(time_factor);
  for (; i + 4 <= count; i += 4) {
    Vd r2 = _mm256_setzero_pd();
    Vd xv[kMaxPathDim];
    for (int a = 0; a < d; ++a) {
      xv[a] = _mm256_loadu_pd(x[a] + i);
      r2 = _mm256_add_pd(r2, _mm256_mul_pd(xv[a], xv[a]));
    }
    const Vd r = _mm256_sqrt_pd(r2);
    const Vd psi = radial_table_lanes(table, r);
    const Vd positive = _mm256_cmp_pd(r, _mm256_setzero_pd(), _CMP_GT_OQ);
    const Vd factor = _mm256_and_pd(_mm256_div_pd(_mm256_mul_pd(tf, psi), r), positive);
    for (int a = 0; a < d; ++a) _mm256_storeu_pd(b[a] + i, _mm256_mul_pd(factor, xv[a]));
  }
  if (i < count) {
    const double* xt[kMaxPathDim];
    double* bt[kMaxPathDim];
    for (int a = 0; a < d; ++a) {
      xt[a] = x[a] + i;
      bt[a] = b[a] + i;
    }
    scalar_kernels().radial_drift(table, time_factor, d, count - i, xt, bt);
  }
}

void em_step_avx2(const EmStepArgs& s) {
  const double sigma_s = std::sqrt(2.0 * s.dt);
  const Vd sigma = _mm256_set1_pd(sigma_s);
  const Vd dt = _mm256_set1_pd(s.dt);
  const Vd cap = _mm256_set1_pd(s.max_displacement);
  const Vd cap2 = _mm256_set1_pd(s.max_displacement * s.max_displacement);
  const int blocks = (s.d + 3) / 4;
  std::size_t i = 0;
  for (; i + 4 <= s.count; i += 4) {
    Vd xi[kMaxPathDim + 4];
    for (int blk = 0; blk < blocks; ++blk)
      normals4_lanes(s.seed, s.step, kStreamEuler | static_cast<std::uint32_t>(blk), s.first_path + i, xi + 4 * blk);
    Vd delta[kMaxPathDim];
    Vd norm2 = _mm256_setzero_pd();
    for (int a = 0; a < s.d; ++a) {
      delta[a] = _mm256_sub_pd(_mm256_mul_pd(sigma, xi[a]), _mm256_mul_pd(_mm256_loadu_pd(s.drift[a] + i), dt));
      norm2 = _mm256_add_pd(norm2, _mm256_mul_pd(delta[a], delta[a]));
    }
    const Vd over = _mm256_cmp_pd(norm2, cap2, _CMP_GT_OQ);
    const int over_bits = _mm256_movemask_pd(over);
    if (over_bits != 0) {
      const Vd scale = _mm256_div_pd(cap, _mm256_sqrt_pd(norm2));
      for (int a = 0; a < s.d; ++a) delta[a] = _mm256_blendv_pd(delta[a], _mm256_mul_pd(delta[a], scale), over);
      for (int l = 0; l < 4; ++l)
        if (over_bits & (1 << l)) s.capped[i + static_cast<std::size_t>(l)] += 1;
    }
    Vd r2 = _mm256_setzero_pd();
    for (int a = 0; a < s.d; ++a) {
      const Vd v = _mm256_add_pd(_mm256_loadu_pd(s.x[a] + i), delta[a]);
      _mm256_storeu_pd(s.x[a] + i, v);
      r2 = _mm256_add_pd(r2, _mm256_mul_pd(v, v));
    }
    const Vd r = _mm256_sqrt_pd(r2);
    const Vd old = _mm256_loadu_pd(s.min_radius + i);
    _mm256_storeu_pd(s.min_radius + i, _mm256_blendv_pd(old, r, _mm256_cmp_pd(r, old, _CMP_LT_OQ)));
    const int finite_bits = _mm256_movemask_pd(_mm256_cmp_pd(r2, _mm256_set1_pd(INFINITY), _CMP_LT_OQ));
    if (finite_bits != 0xf)
      for (int l = 0; l < 4; ++l)
        if (!(finite_bits & (1 << l))) s.nonfinite[i + static_cast<std::size_t>(l)] = 1;
  }
  if (i < s.count) {
    EmStepArgs tail = s;
    double* xt[kMaxPathDim];
    const double* bt[kMaxPathDim];
    for (int a = 0; a < s.d; ++a) {
      xt[a] = s.x[a] + i;
      bt[a] = s.drift[a] + i;
    }
    tail.x = xt;
    tail.drift = bt;
    tail.count = s.count - i;
    tail.first_path = s.first_path + i;
    tail.min_radius = s.min_radius + i;
    tail.capped = s.capped + i;
    tail.nonfinite = s.nonfinite + i;
    scalar_kernels().em_step(tail);
  }
}

void stencil_apply_avx2(const StencilView& op, const double* u, double* y) {
  std::size_t i = 0;
  for (; i + 4 <= op.n; i += 4) {
    Vd acc = _mm256_mul_pd(_mm256_loadu_pd(op.diag + i), _mm256_loadu_pd(u + i));
    for (int a = 0; a < op.d; ++a) {
      const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(i);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(op.lower[a] + i), _mm256_loadu_pd(u + off - op.stride[a])));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(op.upper[a] + i), _mm256_loadu_pd(u + off + op.stride[a])));
    }
    _mm256_storeu_pd(y + i, acc);
  }
  if (i < op.n) {
    StencilView tail = op;
    tail.n = op.n - i;
    tail.diag = op.diag + i;
    for (int a = 0; a < op.d; ++a) {
      tail.lower[a] = op.lower[a] + i;
      tail.upper[a] = op.upper[a] + i;
    }
    scalar_kernels().stencil_apply(tail, u + i, y + i);
  }
}

// Lane j of the accumulator collects indices i with i % 4 == j, like the scalar loop.
inline double reduce_lanes(Vd acc, std::size_t tail_begin, std::size_t n, const double* tail_terms) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (std::size_t i = tail_begin; i < n; ++i) lane[i & 3u] = lane[i & 3u] + tail_terms[i - tail_begin];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  Vd acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double tail[4];
  for (std::size_t j = i; j < n; ++j) tail[j - i] = a[j] * b[j];
  return reduce_lanes(acc, i, n, tail);
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const Vd va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void xpby_avx2(const double* x, double beta, double* y, std::size_t n) {
  const Vd vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_mul_pd(vb, _mm256_loadu_pd(y + i))));
  for (; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

double translate_weighted_sum_avx2(const PointCloudView& pts, const double* z, double kappa, int power) {
  const Vd one = _mm256_set1_pd(1.0);
  const Vd vk = _mm256_set1_pd(kappa);
  Vd acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= pts.n; i += 4) {
    Vd dist2 = _mm256_setzero_pd();
    for (int a = 0; a < pts.d; ++a) {
      const Vd diff = _mm256_sub_pd(_mm256_loadu_pd(pts.coord[static_cast<std::size_t>(a)] + i), _mm256_set1_pd(z[a]));
      dist2 = _mm256_add_pd(dist2, _mm256_mul_pd(diff, diff));
    }
    const Vd q = _mm256_add_pd(one, _mm256_mul_pd(vk, dist2));
    Vd qk = one;
    if (power > 0) {
      qk = q;
      for (int p = 1; p < power; ++p) qk = _mm256_mul_pd(qk, q);
    }
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_loadu_pd(pts.value + i), qk));
  }
  double tail[4];
  for (std::size_t j = i; j < pts.n; ++j) {
    double dist2 = 0.0;
    for (int a = 0; a < pts.d; ++a) {
      const double diff = pts.coord[static_cast<std::size_t>(a)][j] - z[a];
      dist2 = dist2 + diff * diff;
    }
    const double q = 1.0 + kappa * dist2;
    double qk = 1.0;
    if (power > 0) {
      qk = q;
      for (int p = 1; p < power; ++p) qk = qk * q;
    }
    tail[j - i] = pts.value[j] / qk;
  }
  return reduce_lanes(acc, i, pts.n, tail);
}

}  // namespace

const KernelTable* avx2_kernels_unchecked() {
  static const KernelTable table{Isa::avx2,          philox_avx2,  normals4_avx2, radial_drift_avx2,
                                 em_step_avx2,       stencil_apply_avx2,
                                 dot_avx2,           axpy_avx2,    xpby_avx2,     mul_avx2,
                                 translate_weighted_sum_avx2};
  return &table;
}

}  // namespace sslab::simd
