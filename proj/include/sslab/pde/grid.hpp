/**
 * @file grid.hpp
 * @brief Uniform lattice on [-L, L]^d and space-time solutions stored on it.
 *
 * Nodes are x_i = -L + i h, i = 0..N with N = 2L/h; i = 0 and i = N carry the
 * zero Dirichlet data. Frames are row-major with the last axis contiguous.
 */
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "sslab/simd/kernels.hpp"

namespace sslab::pde {

enum class Stepping { implicit_euler, explicit_euler };
enum class BoundaryCondition { zero_dirichlet };

struct Grid {
  int d = 3;
  double L = 2.0;
  double h = 0.1;
  double tau = 0.01;
  double T = 0.25;
  Stepping stepping = Stepping::implicit_euler;

  void validate() const;
  int cells() const;                 // N
  std::size_t nodes_per_axis() const { return static_cast<std::size_t>(cells()) + 1; }
  std::size_t node_count() const;
  int steps() const;                 // T / tau
  std::array<std::ptrdiff_t, simd::kMaxGridDim> strides() const;
  double coord(std::size_t i) const { return -L + h * static_cast<double>(i); }
  /// Coordinates of the flat node index.
  void position(std::size_t flat, double* x) const;
  std::array<std::size_t, simd::kMaxGridDim> multi_index(std::size_t flat) const;
  bool is_boundary(std::size_t flat) const;
  std::string describe() const;
};

class GridSolution {
 public:
  GridSolution() = default;
  explicit GridSolution(Grid grid);

  const Grid& grid() const noexcept { return grid_; }
  BoundaryCondition boundary() const noexcept { return BoundaryCondition::zero_dirichlet; }
  std::size_t frame_count() const noexcept { return frames_.size(); }
  double time(std::size_t k) const { return times_[k]; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& frame(std::size_t k) const { return frames_[k]; }
  std::vector<double>& frame(std::size_t k) { return frames_[k]; }
  void push_frame(double t, std::vector<double> values);
  /// True when frames are consecutive solver steps.
  bool consecutive() const;

  double max_value() const;
  double min_value() const;

  std::vector<std::string>& warnings() noexcept { return warnings_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  std::vector<int>& iterations() noexcept { return iterations_; }
  const std::vector<int>& iterations() const noexcept { return iterations_; }

 private:
  Grid grid_;
  std::vector<double> times_;
  std::vector<std::vector<double>> frames_;
  std::vector<std::string> warnings_;
  std::vector<int> iterations_;
};

}  // namespace sslab::pde
