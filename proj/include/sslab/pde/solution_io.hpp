#pragma once

#include <string>

#include "sslab/pde/grid.hpp"

namespace sslab::pde {

/// 64-byte little-endian header: "KGSOL1\0\0", u32 d, u32 n_time, u32 dims[4], f64 h, tau, T, L;
/// then n_time f64 frame times, then the frames as f64 in row-major order.
inline constexpr std::size_t kHeaderBytes = 64;

/// CSV with columns t,x1..xd,u; `stride` subsamples nodes per axis.
void write_csv(const GridSolution& sol, const std::string& path, const std::string& comment = "",
               std::size_t stride = 1);
void write_binary(const GridSolution& sol, const std::string& path);
GridSolution read_binary(const std::string& path);

}  // namespace sslab::pde
