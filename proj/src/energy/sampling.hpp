#pragma once

#include <cmath>
#include <vector>

#include "sslab/pde/solver.hpp"

namespace sslab::energy::detail {

/// |h| and f on the grid, resampled only when either depends on time.
class SourceSampler {
 public:
  SourceSampler(const pde::SourceSpec& src, const pde::Grid& grid) : src_(src), grid_(grid) {}

  void at(double t) {
    const bool varies = (src_.h_field && src_.h_field->time_dependent()) || (src_.f && src_.f->time_dependent());
    if (ready_ && !varies) return;
    ready_ = true;
    const std::size_t n = grid_.node_count();
    hmag.assign(n, 0.0);
    f.assign(n, 0.0);
    if (src_.is_zero()) return;
    const auto planes = pde::sample_drift(src_.h_field, grid_, t);
    for (const auto& plane : planes)
      for (std::size_t i = 0; i < n; ++i) hmag[i] += plane[i] * plane[i];
    for (double& v : hmag) v = std::sqrt(v);
    f = pde::sample_function(*src_.f, grid_, t);
  }

  std::vector<double> hmag, f;

 private:
  const pde::SourceSpec& src_;
  const pde::Grid& grid_;
  bool ready_ = false;
};

/// 1{|h| >= 1} + 1{|h| < 1} |h|^p
inline double chi(double hmag, double p) { return hmag >= 1.0 ? 1.0 : std::pow(hmag, p); }

inline double cell_volume(const pde::Grid& g) { return std::pow(g.h, g.d); }

}  // namespace sslab::energy::detail
