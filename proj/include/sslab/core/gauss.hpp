#pragma once

#include <vector>

namespace sslab {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

/// Gauss-Legendre rule with n nodes (cached, thread-safe).
const GaussRule& gauss_legendre(int n);

/// Sum of f over the rule mapped to [a, b].
template <class F>
double integrate(const GaussRule& rule, double a, double b, F&& f) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) acc += rule.w[i] * f(mid + half * rule.x[i]);
  return acc * half;
}

}  // namespace sslab
