#pragma once

#include <vector>

#include "sslab/pde/grid.hpp"

namespace sslab::energy {

/// (u - c)_+ frame by frame.
pde::GridSolution truncate_level(const pde::GridSolution& u, double c);

struct LevelEntry {
  int m = 0;
  double R = 1.0;         // (1 + 2^-m) / 2
  double M = 0.0;         // M (2 - 2^-m)
  double grad_bound = 0;  // c0 2^m
};

struct LevelSchedule {
  double M = 1.0;
  std::vector<LevelEntry> entries;
};

LevelSchedule level_sequences(double M, int m_max);

}  // namespace sslab::energy
