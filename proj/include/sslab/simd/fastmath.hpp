/**
 * @file fastmath.hpp
 * @brief Scalar reference versions of the transcendental pieces used by the
 * normal generator. The AVX2 kernels evaluate the same polynomials in the same
 * order, which is what makes the two tables bit-identical.
 */
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

namespace sslab::simd::fastmath {

inline constexpr double kLn2 = 0.6931471805599453094;
inline constexpr double kTwoPi = 6.283185307179586477;
inline constexpr double kSqrtHalf = 0.7071067811865475244;
inline constexpr double kTwoPow32Inv = 2.3283064365386962890625e-10;

// 1/(2k+1), k = 0..10: series for atanh(s)/s.
inline constexpr double kLogCoeff[11] = {1.0,       1.0 / 3.0,  1.0 / 5.0,  1.0 / 7.0,
                                         1.0 / 9.0, 1.0 / 11.0, 1.0 / 13.0, 1.0 / 15.0,
                                         1.0 / 17.0, 1.0 / 19.0, 1.0 / 21.0};
// Taylor coefficients of sin(t)/t and cos(t) in t^2 on |t| <= pi/4.
inline constexpr double kSinCoeff[9] = {1.0,
                                        -1.0 / 6.0,
                                        1.0 / 120.0,
                                        -1.0 / 5040.0,
                                        1.0 / 362880.0,
                                        -1.0 / 39916800.0,
                                        1.0 / 6227020800.0,
                                        -1.0 / 1307674368000.0,
                                        1.0 / 355687428096000.0};
inline constexpr double kCosCoeff[9] = {1.0,
                                        -1.0 / 2.0,
                                        1.0 / 24.0,
                                        -1.0 / 720.0,
                                        1.0 / 40320.0,
                                        -1.0 / 3628800.0,
                                        1.0 / 479001600.0,
                                        -1.0 / 87178291200.0,
                                        1.0 / 20922789888000.0};

/// Natural log for positive normal doubles.
inline double log_pos(double x) noexcept {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  double e = static_cast<double>(static_cast<std::int64_t>((bits >> 52) & 0x7ffu)) - 1023.0;
  double m = std::bit_cast<double>((bits & 0x000fffffffffffffULL) | 0x3ff0000000000000ULL);
  if (m > 2.0 * kSqrtHalf) {
    m = m * 0.5;
    e = e + 1.0;
  }
  const double s = (m - 1.0) / (m + 1.0);
  const double z = s * s;
  double p = kLogCoeff[10];
  for (int k = 9; k >= 0; --k) p = p * z + kLogCoeff[k];
  return e * kLn2 + (s + s) * p;
}

/// cos(2 pi u), sin(2 pi u) for u in [0, 1].
inline void sincos_2pi(double u, double& c, double& s) noexcept {
  const double q = std::nearbyint(u * 4.0);
  const double y = u - q * 0.25;
  const double t = y * kTwoPi;
  const double t2 = t * t;
  double ps = kSinCoeff[8];
  double pc = kCosCoeff[8];
  for (int k = 7; k >= 0; --k) {
    ps = ps * t2 + kSinCoeff[k];
    pc = pc * t2 + kCosCoeff[k];
  }
  const double sn = t * ps;
  const double cs = pc;
  const double quadrant = q - 4.0 * std::floor(q * 0.25);
  if (quadrant == 0.0) {
    c = cs; s = sn;
  } else if (quadrant == 1.0) {
    c = -sn; s = cs;
  } else if (quadrant == 2.0) {
    c = -cs; s = -sn;
  } else {
    c = sn; s = -cs;
  }
}

/// (w + 0.5) 2^-32: open-interval uniform from a 32-bit word.
inline double uniform_open(std::uint32_t w) noexcept {
  return (static_cast<double>(w) + 0.5) * kTwoPow32Inv;
}

/// Box-Muller pair from two words.
inline void box_muller(std::uint32_t wa, std::uint32_t wb, double& n0, double& n1) noexcept {
  const double r = std::sqrt(-2.0 * log_pos(uniform_open(wa)));
  double c = 0.0;
  double s = 0.0;
  sincos_2pi(uniform_open(wb), c, s);
  n0 = r * c;
  n1 = r * s;
}

}  // namespace sslab::simd::fastmath
