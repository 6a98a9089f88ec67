#include "sslab/pde/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "sslab/core/error.hpp"
#include "sslab/core/format.hpp"
#include "sslab/simd/kernels.hpp"

namespace sslab::pde {

namespace {

using Planes = std::vector<std::vector<double>>;

struct Coordinates {
  Planes x;  // d planes of node_count entries
};

Coordinates coordinates(const Grid& grid) {
  Coordinates c;
  const std::size_t n = grid.node_count();
  c.x.assign(static_cast<std::size_t>(grid.d), std::vector<double>(n));
  double pos[simd::kMaxGridDim];
  for (std::size_t i = 0; i < n; ++i) {
    grid.position(i, pos);
    for (int a = 0; a < grid.d; ++a) c.x[a][i] = pos[a];
  }
  return c;
}

void sample_drift_into(const drift::DriftField& b, const Coordinates& c, double t, Planes& out) {
  const int d = static_cast<int>(c.x.size());
  const std::size_t n = c.x[0].size();
  const std::size_t chunk = 4096;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t cnt = std::min(chunk, n - start);
    const double* xp[simd::kMaxPathDim];
    double* bp[simd::kMaxPathDim];
    for (int a = 0; a < d; ++a) {
      xp[a] = c.x[a].data() + start;
      bp[a] = out[a].data() + start;
    }
    b.eval_block(t, cnt, xp, bp);
  }
}

void sample_source_into(const SourceSpec& src, const Coordinates& c, double t, std::vector<double>& out) {
  const int d = static_cast<int>(c.x.size());
  const std::size_t n = c.x[0].size();
  double x[simd::kMaxGridDim];
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) x[a] = c.x[a][i];
    out[i] = src.value(t, x);
  }
}

/// A = I + tau (-Lap_h + upwind(c)) with identity rows on the boundary.
struct Operator {
  std::vector<double> diag;
  Planes lower, upper;
  std::ptrdiff_t offset = 0;
  simd::StencilView view;
  double max_speed = 0.0;

  void build(const Grid& grid, const Planes& c, const std::vector<std::uint8_t>& boundary) {
    const std::size_t n = grid.node_count();
    const int d = grid.d;
    diag.assign(n, 1.0);
    lower.assign(static_cast<std::size_t>(d), std::vector<double>(n, 0.0));
    upper.assign(static_cast<std::size_t>(d), std::vector<double>(n, 0.0));
    const double h = grid.h, tau = grid.tau;
    const double diff = tau / (h * h);
    const double adv = tau / h;
    max_speed = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (boundary[i]) continue;
      double dg = 1.0 + 2.0 * d * diff;
      for (int a = 0; a < d; ++a) {
        const double ca = c.empty() ? 0.0 : c[a][i];
        max_speed = std::max(max_speed, std::abs(ca));
        const double plus = ca > 0.0 ? ca : 0.0;
        const double minus = ca < 0.0 ? ca : 0.0;
        dg += adv * (plus - minus);
        lower[a][i] = -diff - adv * plus;
        upper[a][i] = -diff + adv * minus;
      }
      diag[i] = dg;
    }
    const auto strides = grid.strides();
    offset = strides[0];
    view.d = d;
    view.n = n - 2 * static_cast<std::size_t>(offset);
    view.stride = strides;
    view.diag = diag.data() + offset;
    for (int a = 0; a < d; ++a) {
      view.lower[a] = lower[a].data() + offset;
      view.upper[a] = upper[a].data() + offset;
    }
  }

  void apply(const std::vector<double>& u, std::vector<double>& y) const {
    simd::active_kernels().stencil_apply(view, u.data() + offset, y.data() + offset);
  }
};

/// Jacobi-preconditioned BiCGSTAB on the interior range; vectors carry zero halos.
class BiCgStab {
 public:
  explicit BiCgStab(std::size_t n) : r_(n), r0_(n), p_(n), v_(n), s_(n), t_(n), ph_(n), sh_(n), inv_(n) {}

  int solve(const Operator& A, const std::vector<double>& rhs, std::vector<double>& x, double rel_tol, int max_iter) {
    const auto& K = simd::active_kernels();
    const std::size_t off = static_cast<std::size_t>(A.offset);
    const std::size_t n = A.view.n;
    auto at = [off](std::vector<double>& v) { return v.data() + off; };
    auto cat = [off](const std::vector<double>& v) { return v.data() + off; };
    for (std::size_t i = 0; i < A.diag.size(); ++i) inv_[i] = 1.0 / A.diag[i];

    const double bnorm = std::sqrt(K.dot(cat(rhs), cat(rhs), n));
    if (bnorm == 0.0) {
      std::fill(x.begin(), x.end(), 0.0);
      return 0;
    }
    A.apply(x, r_);
    for (std::size_t i = off; i < off + n; ++i) r_[i] = rhs[i] - r_[i];
    std::copy(r_.begin(), r_.end(), r0_.begin());
    std::fill(p_.begin(), p_.end(), 0.0);
    std::fill(v_.begin(), v_.end(), 0.0);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    const double target = rel_tol * bnorm;
    if (std::sqrt(K.dot(cat(r_), cat(r_), n)) <= target) return 0;
    for (int it = 1; it <= max_iter; ++it) {
      const double rho_new = K.dot(cat(r0_), cat(r_), n);
      if (rho_new == 0.0) return -it;
      const double beta = (rho_new / rho) * (alpha / omega);
      K.axpy(-omega, cat(v_), at(p_), n);
      K.xpby(cat(r_), beta, at(p_), n);
      K.mul(cat(inv_), cat(p_), at(ph_), n);
      A.apply(ph_, v_);
      alpha = rho_new / K.dot(cat(r0_), cat(v_), n);
      std::copy(r_.begin(), r_.end(), s_.begin());
      K.axpy(-alpha, cat(v_), at(s_), n);
      if (std::sqrt(K.dot(cat(s_), cat(s_), n)) <= target) {
        K.axpy(alpha, cat(ph_), at(x), n);
        return it;
      }
      K.mul(cat(inv_), cat(s_), at(sh_), n);
      A.apply(sh_, t_);
      const double tt = K.dot(cat(t_), cat(t_), n);
      omega = tt > 0.0 ? K.dot(cat(t_), cat(s_), n) / tt : 0.0;
      K.axpy(alpha, cat(ph_), at(x), n);
      K.axpy(omega, cat(sh_), at(x), n);
      std::copy(s_.begin(), s_.end(), r_.begin());
      K.axpy(-omega, cat(t_), at(r_), n);
      if (std::sqrt(K.dot(cat(r_), cat(r_), n)) <= target) return it;
      if (omega == 0.0) return -it;
      rho = rho_new;
    }
    return -max_iter;
  }

 private:
  std::vector<double> r_, r0_, p_, v_, s_, t_, ph_, sh_, inv_;
};

std::vector<std::uint8_t> boundary_mask(const Grid& grid) {
  std::vector<std::uint8_t> m(grid.node_count());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = grid.is_boundary(i) ? 1 : 0;
  return m;
}

/// Forward problem in the solver's own time s in [0, T]:
/// d_s u - Lap u + c(s) . grad u = S(s), u(0) = u0.
struct ForwardProblem {
  std::function<void(double, Planes&)> advection;  // empty when c = 0
  bool advection_varies = false;
  std::function<void(double, std::vector<double>&)> source;
  bool source_varies = false;
  std::function<void(std::vector<double>&)> initial;
};

GridSolution run_forward(const Grid& grid, const ForwardProblem& prob, const SolveOptions& opt,
                         const std::function<double(double)>& physical_time) {
  grid.validate();
  require(opt.save_every >= 1, ErrorCode::invalid_parameter, "save_every must be >= 1");
  const std::size_t n = grid.node_count();
  const auto boundary = boundary_mask(grid);
  const int steps = grid.steps();
  const int d = grid.d;

  Planes c;
  if (prob.advection) {
    c.assign(static_cast<std::size_t>(d), std::vector<double>(n, 0.0));
    prob.advection(grid.stepping == Stepping::implicit_euler ? grid.tau : 0.0, c);
  }
  Operator A;
  A.build(grid, c, boundary);

  if (grid.stepping == Stepping::explicit_euler) {
    const double limit = 1.0 / (2.0 * d / (grid.h * grid.h) + d * A.max_speed / grid.h);
    if (grid.tau > limit) {
      double suggested = std::min(limit, grid.h * grid.h / (2.0 * d));
      throw StabilityViolation("explicit step tau=" + fmt(grid.tau) + " exceeds the stable limit " + fmt(limit),
                               suggested);
    }
  }

  GridSolution sol(grid);
  if (A.max_speed * grid.h / 2.0 > opt.peclet_limit)
    sol.warnings().push_back("cell peclet " + fmt(A.max_speed * grid.h / 2.0) + " exceeds " + fmt(opt.peclet_limit));

  std::vector<double> u(n, 0.0), next(n, 0.0), rhs(n, 0.0), S(n, 0.0), work(n, 0.0);
  if (prob.initial) prob.initial(u);
  for (std::size_t i = 0; i < n; ++i)
    if (boundary[i]) u[i] = 0.0;
  std::vector<std::size_t> saved{0};
  sol.push_frame(physical_time(0.0), u);

  BiCgStab solver(n);
  bool source_ready = false;
  for (int k = 0; k < steps; ++k) {
    const double s_now = k * grid.tau;
    const double s_next = (k + 1) * grid.tau;
    const double s_eval = grid.stepping == Stepping::implicit_euler ? s_next : s_now;
    if (prob.advection && prob.advection_varies && k > 0) {
      prob.advection(s_eval, c);
      A.build(grid, c, boundary);
    }
    if (!source_ready || prob.source_varies) {
      prob.source(s_eval, S);
      source_ready = true;
    }
    if (grid.stepping == Stepping::implicit_euler) {
      for (std::size_t i = 0; i < n; ++i) rhs[i] = boundary[i] ? 0.0 : u[i] + grid.tau * S[i];
      next = u;
      const int its = solver.solve(A, rhs, next, opt.rel_tol, opt.max_iter);
      sol.iterations().push_back(its);
      if (its < 0) sol.warnings().push_back("bicgstab did not converge at step " + std::to_string(k + 1));
    } else {
      A.apply(u, work);
      for (std::size_t i = 0; i < n; ++i) next[i] = boundary[i] ? 0.0 : 2.0 * u[i] - work[i] + grid.tau * S[i];
    }
    u.swap(next);
    if ((k + 1) % static_cast<int>(opt.save_every) == 0 || k + 1 == steps) sol.push_frame(physical_time(s_next), u);
  }
  return sol;
}

}  // namespace

double SourceSpec::value(double t, const double* x) const {
  if (!h_field || !f) return 0.0;
  const double fv = f->value(t, x);
  if (fv == 0.0) return 0.0;
  return h_field->magnitude(t, x) * fv;
}

bool SourceSpec::is_zero() const {
  if (!h_field || !f) return true;
  if (auto s = h_field->sup_bound(); s && *s == 0.0) return true;
  return f->sup_abs() == 0.0;
}

void SourceSpec::validate(const Grid& grid) const {
  if (h_field) require(h_field->d() == grid.d, ErrorCode::grid_mismatch, "source field dimension differs from grid");
  if (f) require(f->d() == grid.d, ErrorCode::grid_mismatch, "source function dimension differs from grid");
}

std::vector<std::vector<double>> sample_drift(const drift::DriftPtr& b, const Grid& grid, double t) {
  Planes out(static_cast<std::size_t>(grid.d), std::vector<double>(grid.node_count(), 0.0));
  if (b) sample_drift_into(*b, coordinates(grid), t, out);
  return out;
}

std::vector<double> sample_source(const SourceSpec& src, const Grid& grid, double t) {
  std::vector<double> out(grid.node_count(), 0.0);
  sample_source_into(src, coordinates(grid), t, out);
  return out;
}

std::vector<double> sample_function(const ScalarFunction& f, const Grid& grid, double t) {
  std::vector<double> out(grid.node_count());
  double x[simd::kMaxGridDim];
  for (std::size_t i = 0; i < out.size(); ++i) {
    grid.position(i, x);
    out[i] = f.value(t, x);
  }
  return out;
}

GridSolution solve_cauchy(const drift::DriftPtr& b, const SourceSpec& src, const Grid& grid,
                          const SolveOptions& options) {
  grid.validate();
  if (b) require(b->d() == grid.d, ErrorCode::grid_mismatch, "drift dimension differs from grid");
  src.validate(grid);
  const auto coords = std::make_shared<Coordinates>(coordinates(grid));
  ForwardProblem prob;
  if (b) {
    prob.advection = [b, coords](double t, Planes& c) { sample_drift_into(*b, *coords, t, c); };
    prob.advection_varies = b->time_dependent();
  }
  const bool zero = src.is_zero();
  prob.source = [src, coords, zero](double t, std::vector<double>& S) {
    if (zero) std::fill(S.begin(), S.end(), 0.0);
    else sample_source_into(src, *coords, t, S);
  };
  prob.source_varies = !zero && ((src.h_field && src.h_field->time_dependent()) || (src.f && src.f->time_dependent()));
  if (options.initial) {
    auto init = options.initial;
    prob.initial = [init, grid](std::vector<double>& u) { u = sample_function(*init, grid, 0.0); };
  }
  return run_forward(grid, prob, options, [](double s) { return s; });
}

GridSolution solve_terminal(const drift::DriftPtr& b, const ScalarPtr& F, const Grid& grid, double t1,
                            const SolveOptions& options) {
  grid.validate();
  if (b) require(b->d() == grid.d, ErrorCode::grid_mismatch, "drift dimension differs from grid");
  require(F != nullptr && F->d() == grid.d, ErrorCode::grid_mismatch, "terminal source dimension differs from grid");
  require(!options.initial, ErrorCode::invalid_parameter, "terminal problems have zero terminal data");
  const auto coords = std::make_shared<Coordinates>(coordinates(grid));
  ForwardProblem prob;
  if (b) {
    prob.advection = [b, coords, t1](double s, Planes& c) {
      sample_drift_into(*b, *coords, t1 - s, c);
      for (auto& plane : c)
        for (double& v : plane) v = -v;
    };
    prob.advection_varies = b->time_dependent();
  }
  const bool zero = F->sup_abs() == 0.0;
  prob.source = [F, coords, t1, zero, grid](double s, std::vector<double>& S) {
    if (zero) {
      std::fill(S.begin(), S.end(), 0.0);
      return;
    }
    double x[simd::kMaxGridDim];
    for (std::size_t i = 0; i < S.size(); ++i) {
      for (int a = 0; a < grid.d; ++a) x[a] = coords->x[a][i];
      S[i] = F->value(t1 - s, x);
    }
  };
  prob.source_varies = F->time_dependent();
  auto fwd = run_forward(grid, prob, options, [t1](double s) { return t1 - s; });
  GridSolution out(grid);
  for (std::size_t k = fwd.frame_count(); k-- > 0;) out.push_frame(fwd.time(k), fwd.frame(k));
  out.warnings() = fwd.warnings();
  out.iterations() = fwd.iterations();
  return out;
}

double residual_norm(const GridSolution& sol, const drift::DriftPtr& b, const SourceSpec& src) {
  const Grid& grid = sol.grid();
  require(sol.frame_count() >= 2 && sol.consecutive(), ErrorCode::grid_mismatch,
          "residual needs every solver step stored (save_every = 1)");
  const std::size_t n = grid.node_count();
  const auto boundary = boundary_mask(grid);
  const auto coords = coordinates(grid);
  Planes c;
  if (b) c.assign(static_cast<std::size_t>(grid.d), std::vector<double>(n, 0.0));
  std::vector<double> S(n), Au(n);
  Operator A;
  const double cell = std::pow(grid.h, grid.d);
  double acc = 0.0;
  for (std::size_t k = 1; k < sol.frame_count(); ++k) {
    const double t = sol.time(k);
    if (b) sample_drift_into(*b, coords, t, c);
    A.build(grid, c, boundary);
    sample_source_into(src, coords, t, S);
    const auto& u = sol.frame(k);
    const auto& prev = sol.frame(k - 1);
    std::fill(Au.begin(), Au.end(), 0.0);
    A.apply(u, Au);
    for (std::size_t i = 0; i < n; ++i) {
      if (boundary[i]) continue;
      const double r = (Au[i] - prev[i] - grid.tau * S[i]) / grid.tau;
      acc += r * r * grid.tau * cell;
    }
  }
  return std::sqrt(acc);
}

}  // namespace sslab::pde
