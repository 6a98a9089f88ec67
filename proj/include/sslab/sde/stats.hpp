#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sslab::sde {

/// Pairwise summation; the result depends only on the order of `v`.
double pairwise_sum(const double* v, std::size_t n);

struct MeanStat {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

/// Mean and standard error over entries with mask == 0 (null mask keeps all).
MeanStat mean_stat(const std::vector<double>& v, const std::vector<std::uint8_t>* mask = nullptr);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::vector<double> a, std::vector<double> b);

struct PowerFit {
  double mu = 0.0;
  double intercept = 0.0;  // log C
  double r2 = 0.0;
};

/// Least squares of log y on log x.
PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sslab::sde
