#include "sslab/energy/dg_iterate.hpp"

#include <cfloat>
#include <cmath>

#include "sslab/core/error.hpp"

namespace sslab::energy {

double dg_threshold(double N, double C0, double alpha) {
  return std::pow(N, -1.0 / alpha) * std::pow(C0, -1.0 / (alpha * alpha));
}

DGSequence dg_iterate(double N, double C0, double alpha, double y0, int max_m) {
  require(N > 0.0 && std::isfinite(N), ErrorCode::invalid_parameter, "dg_iterate needs N > 0");
  require(C0 > 1.0 && std::isfinite(C0), ErrorCode::invalid_parameter, "dg_iterate needs C0 > 1");
  require(alpha > 0.0 && std::isfinite(alpha), ErrorCode::invalid_parameter, "dg_iterate needs alpha > 0");
  require(y0 >= 0.0 && std::isfinite(y0), ErrorCode::invalid_parameter, "dg_iterate needs y0 >= 0");
  require(max_m >= 0, ErrorCode::invalid_parameter, "dg_iterate needs max_m >= 0");

  DGSequence s;
  s.N = N;
  s.C0 = C0;
  s.alpha = alpha;
  s.threshold = dg_threshold(N, C0, alpha);
  s.below_threshold = y0 <= s.threshold;
  s.y.reserve(static_cast<std::size_t>(max_m) + 1);
  if (y0 == 0.0) {
    s.y.assign(static_cast<std::size_t>(max_m) + 1, 0.0);
    s.converged = true;
    return s;
  }

  const double log_thr = std::log(s.threshold);
  const double log_c0 = std::log(C0);
  const double lz0 = std::log(y0 / s.threshold);
  const double log_max = std::log(DBL_MAX);
  double growth = 1.0;  // (1 + alpha)^m
  for (int m = 0; m <= max_m; ++m, growth *= 1.0 + alpha) {
    const double lz = lz0 == 0.0 ? 0.0 : growth * lz0;
    const double ly = log_thr - m / alpha * log_c0 + lz;
    if (!(ly < log_max)) {
      s.diverged = true;
      s.blowup_index = m;
      break;
    }
    const double geo = std::pow(C0, -m / alpha);
    const double z = std::exp(lz);
    double y = s.threshold * geo * z;
    if (!(geo > 0.0) || !std::isfinite(z) || !(z > 0.0)) y = std::exp(ly);
    s.y.push_back(y);
  }
  s.converged = !s.diverged && s.y.back() < 1e-12;
  return s;
}

}  // namespace sslab::energy
