#include "sslab/sde/stats.hpp"

#include <algorithm>
#include <cmath>

#include "sslab/core/error.hpp"

namespace sslab::sde {

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

MeanStat mean_stat(const std::vector<double>& v, const std::vector<std::uint8_t>* mask) {
  std::vector<double> kept;
  kept.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!mask || (*mask)[i] == 0) kept.push_back(v[i]);
  MeanStat s;
  s.n = kept.size();
  if (s.n == 0) return s;
  const double n = static_cast<double>(s.n);
  s.mean = pairwise_sum(kept.data(), kept.size()) / n;
  if (s.n < 2) return s;
  for (auto& x : kept) x = (x - s.mean) * (x - s.mean);
  const double var = pairwise_sum(kept.data(), kept.size()) / (n - 1.0);
  s.stderr_ = std::sqrt(var / n);
  return s;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorCode::invalid_parameter, "KS distance needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::invalid_parameter,
          "power fit needs at least two matching points");
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, ErrorCode::degenerate, "power fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  require(sxx > 0.0, ErrorCode::degenerate, "power fit needs distinct abscissae");
  PowerFit f;
  f.mu = sxy / sxx;
  f.intercept = my - f.mu * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

}  // namespace sslab::sde
