#include "sslab/pde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"

namespace sslab::pde {

namespace {

bool near_integer(double v) { return std::abs(v - std::round(v)) < 1e-9 * std::max(1.0, std::abs(v)); }

}  // namespace

void Grid::validate() const {
  require(d >= 1 && d <= simd::kMaxGridDim, ErrorCode::invalid_dimension,
          "dense grids support d <= " + std::to_string(simd::kMaxGridDim) + ", got " + std::to_string(d));
  require(h > 0.0 && tau > 0.0 && T > 0.0, ErrorCode::invalid_parameter, "grid needs h, tau, T > 0");
  require(L >= 2.0, ErrorCode::invalid_parameter, "grid half-width L must be >= 2");
  require(near_integer(2.0 * L / h), ErrorCode::invalid_parameter, "2L/h must be an integer");
  require(near_integer(T / tau), ErrorCode::invalid_parameter, "T/tau must be an integer");
}

int Grid::cells() const { return static_cast<int>(std::lround(2.0 * L / h)); }

int Grid::steps() const { return static_cast<int>(std::lround(T / tau)); }

std::size_t Grid::node_count() const {
  std::size_t n = 1;
  for (int a = 0; a < d; ++a) n *= nodes_per_axis();
  return n;
}

std::array<std::ptrdiff_t, simd::kMaxGridDim> Grid::strides() const {
  std::array<std::ptrdiff_t, simd::kMaxGridDim> s{};
  std::ptrdiff_t acc = 1;
  for (int a = d - 1; a >= 0; --a) {
    s[a] = acc;
    acc *= static_cast<std::ptrdiff_t>(nodes_per_axis());
  }
  return s;
}

std::array<std::size_t, simd::kMaxGridDim> Grid::multi_index(std::size_t flat) const {
  std::array<std::size_t, simd::kMaxGridDim> idx{};
  const std::size_t n = nodes_per_axis();
  for (int a = d - 1; a >= 0; --a) {
    idx[a] = flat % n;
    flat /= n;
  }
  return idx;
}

void Grid::position(std::size_t flat, double* x) const {
  const auto idx = multi_index(flat);
  for (int a = 0; a < d; ++a) x[a] = coord(idx[a]);
}

bool Grid::is_boundary(std::size_t flat) const {
  const auto idx = multi_index(flat);
  const std::size_t last = nodes_per_axis() - 1;
  for (int a = 0; a < d; ++a)
    if (idx[a] == 0 || idx[a] == last) return true;
  return false;
}

std::string Grid::describe() const {
  std::ostringstream os;
  os << "d=" << d << " L=" << fmt(L) << " h=" << fmt(h) << " tau=" << fmt(tau) << " T=" << fmt(T)
     << (stepping == Stepping::implicit_euler ? " implicit" : " explicit");
  return os.str();
}

GridSolution::GridSolution(Grid grid) : grid_(grid) { grid_.validate(); }

void GridSolution::push_frame(double t, std::vector<double> values) {
  require(values.size() == grid_.node_count(), ErrorCode::grid_mismatch, "frame size does not match grid");
  times_.push_back(t);
  frames_.push_back(std::move(values));
}

bool GridSolution::consecutive() const {
  for (std::size_t k = 1; k < times_.size(); ++k)
    if (std::abs(times_[k] - times_[k - 1] - grid_.tau) > 1e-9 * grid_.tau) return false;
  return true;
}

double GridSolution::max_value() const {
  double m = -INFINITY;
  for (const auto& f : frames_)
    for (double v : f) m = std::max(m, v);
  return m;
}

double GridSolution::min_value() const {
  double m = INFINITY;
  for (const auto& f : frames_)
    for (double v : f) m = std::min(m, v);
  return m;
}

}  // namespace sslab::pde
