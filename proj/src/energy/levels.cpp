#include "sslab/energy/levels.hpp"

#include <algorithm>
#include <cmath>

#include "sslab/core/error.hpp"
#include "sslab/energy/weights.hpp"

namespace sslab::energy {

pde::GridSolution truncate_level(const pde::GridSolution& u, double c) {
  pde::GridSolution out(u.grid());
  for (std::size_t k = 0; k < u.frame_count(); ++k) {
    std::vector<double> f = u.frame(k);
    for (double& v : f) v = std::max(v - c, 0.0);
    out.push_frame(u.time(k), std::move(f));
  }
  return out;
}

LevelSchedule level_sequences(double M, int m_max) {
  require(M > 0.0 && std::isfinite(M), ErrorCode::invalid_parameter, "level sequences need M > 0");
  require(m_max >= 0, ErrorCode::invalid_parameter, "m_max must be >= 0");
  LevelSchedule s;
  s.M = M;
  for (int m = 0; m <= m_max; ++m) {
    const double q = std::ldexp(1.0, -m);
    s.entries.push_back({m, 0.5 * (1.0 + q), M * (2.0 - q), CutoffFamily::c0() * std::ldexp(1.0, m)});
  }
  return s;
}

}  // namespace sslab::energy
