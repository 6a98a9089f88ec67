/**
 * @file dg_iterate.hpp
 * @brief The fast-geometric recurrence y_{m+1} = N C0^m y_m^{1+alpha}.
 *
 * With y* = N^{-1/alpha} C0^{-1/alpha^2} and z_m = y_m C0^{m/alpha} / y*, the
 * recurrence becomes z_{m+1} = z_m^{1+alpha}. Iterating z in log form avoids the
 * double-exponential amplification of rounding errors near the threshold.
 */
#pragma once

#include <optional>
#include <vector>

namespace sslab::energy {

struct DGSequence {
  double N = 1.0;
  double C0 = 2.0;
  double alpha = 1.0;
  std::vector<double> y;
  double threshold = 0.0;      // N^{-1/alpha} C0^{-1/alpha^2}
  bool below_threshold = false;
  bool converged = false;      // y_{max_m} < 1e-12
  bool diverged = false;
  std::optional<int> blowup_index;
};

DGSequence dg_iterate(double N, double C0, double alpha, double y0, int max_m);

double dg_threshold(double N, double C0, double alpha);

/// Plain recurrence, one multiplication chain per step.
template <class T>
std::vector<T> dg_direct(const T& N, const T& C0, int alpha, const T& y0, int max_m) {
  std::vector<T> y{y0};
  T c0m = 1;
  for (int m = 0; m < max_m; ++m) {
    T p = y.back();
    for (int k = 0; k < alpha; ++k) p *= y.back();
    y.push_back(N * c0m * p);
    c0m *= C0;
  }
  return y;
}

/// Equality form of the two-step level recursion: E_{m+1} = C4^m U_m and
/// U_{m+1} = c E_{m+1} lambda_m^alpha with lambda_m = (M 2^{-m-1})^{-p} U_m.
template <class T>
std::vector<T> chain_iterate(const T& C4, const T& c, const T& M, int p, int alpha, const T& U0, int max_m) {
  std::vector<T> U{U0};
  T c4m = 1;
  T level = M / 2;
  for (int m = 0; m < max_m; ++m) {
    const T E = c4m * U.back();
    T lam = U.back();
    for (int k = 0; k < p; ++k) lam /= level;
    T lam_a = 1;
    for (int k = 0; k < alpha; ++k) lam_a *= lam;
    U.push_back(c * E * lam_a);
    c4m *= C4;
    level /= 2;
  }
  return U;
}

}  // namespace sslab::energy
