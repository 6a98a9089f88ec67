#include "sslab/pde/solution_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sslab/core/io.hpp"

namespace sslab::pde {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

void write_csv(const GridSolution& sol, const std::string& path, const std::string& comment, std::size_t stride) {
  require(stride >= 1, ErrorCode::invalid_parameter, "csv stride must be >= 1");
  const Grid& g = sol.grid();
  write_atomic(path, [&](std::ostream& out) {
    if (!comment.empty()) out << comment << '\n';
    out << 't';
    for (int a = 0; a < g.d; ++a) out << ",x" << (a + 1);
    out << ",u\n";
    double x[simd::kMaxGridDim];
    for (std::size_t k = 0; k < sol.frame_count(); ++k) {
      const auto& f = sol.frame(k);
      const std::string tk = fmt(sol.time(k));
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (stride > 1) {
          const auto idx = g.multi_index(i);
          bool keep = true;
          for (int a = 0; a < g.d; ++a) keep = keep && idx[a] % stride == 0;
          if (!keep) continue;
        }
        g.position(i, x);
        out << tk;
        for (int a = 0; a < g.d; ++a) out << ',' << fmt(x[a]);
        out << ',' << fmt(f[i]) << '\n';
      }
    }
  });
}

void write_binary(const GridSolution& sol, const std::string& path) {
  const Grid& g = sol.grid();
  char head[kHeaderBytes] = {};
  std::memcpy(head, "KGSOL1\0\0", 8);
  const std::uint32_t d = static_cast<std::uint32_t>(g.d);
  const std::uint32_t nt = static_cast<std::uint32_t>(sol.frame_count());
  std::uint32_t dims[4] = {1, 1, 1, 1};
  for (int a = 0; a < g.d; ++a) dims[a] = static_cast<std::uint32_t>(g.nodes_per_axis());
  const double reals[4] = {g.h, g.tau, g.T, g.L};
  std::memcpy(head + 8, &d, 4);
  std::memcpy(head + 12, &nt, 4);
  std::memcpy(head + 16, dims, 16);
  std::memcpy(head + 32, reals, 32);
  write_atomic(
      path,
      [&](std::ostream& out) {
        out.write(head, kHeaderBytes);
        out.write(reinterpret_cast<const char*>(sol.times().data()),
                  static_cast<std::streamsize>(sol.frame_count() * sizeof(double)));
        for (std::size_t k = 0; k < sol.frame_count(); ++k)
          out.write(reinterpret_cast<const char*>(sol.frame(k).data()),
                    static_cast<std::streamsize>(sol.frame(k).size() * sizeof(double)));
      },
      true);
}

GridSolution read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io_failure, "cannot open '" + path + "'");
  char head[kHeaderBytes];
  in.read(head, kHeaderBytes);
  require(in.gcount() == static_cast<std::streamsize>(kHeaderBytes) && std::memcmp(head, "KGSOL1\0\0", 8) == 0,
          ErrorCode::io_failure, "'" + path + "' is not a KGSOL1 dump");
  std::uint32_t d, nt, dims[4];
  double reals[4];
  std::memcpy(&d, head + 8, 4);
  std::memcpy(&nt, head + 12, 4);
  std::memcpy(dims, head + 16, 16);
  std::memcpy(reals, head + 32, 32);
  Grid g;
  g.d = static_cast<int>(d);
  g.h = reals[0];
  g.tau = reals[1];
  g.T = reals[2];
  g.L = reals[3];
  GridSolution sol(g);
  require(dims[0] == g.nodes_per_axis(), ErrorCode::io_failure, "dump dimensions disagree with its grid");
  std::vector<double> times(nt);
  in.read(reinterpret_cast<char*>(times.data()), static_cast<std::streamsize>(nt * sizeof(double)));
  for (std::uint32_t k = 0; k < nt; ++k) {
    std::vector<double> f(g.node_count());
    in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
    require(static_cast<bool>(in), ErrorCode::io_failure, "truncated dump '" + path + "'");
    sol.push_frame(times[k], std::move(f));
  }
  return sol;
}

}  // namespace sslab::pde
