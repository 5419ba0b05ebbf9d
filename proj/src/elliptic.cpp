#include "pmt/elliptic.hpp"

#include <cmath>
#include <string>

#include "pmt/parallel.hpp"

namespace pmt {

namespace k = kernels::omp;

// Face weights use phi^2 evaluated at the face midpoint; the factor is analytic, and
// this resolves a narrow core (s ~ h) better than averaging the two node values.
LaplaceBeltrami assemble_laplace_beltrami(const MetricGrid& grid) {
  LaplaceBeltrami op;
  op.spec = grid.spec;
  const GridSpec& g = grid.spec;
  const std::size_t N = g.size();
  const int n = g.n();
  op.phi6 = grid.sqrt_g;
  for (auto& f : op.weights.face) f.assign(N, 0.0);
  op.weights.diag.assign(N, 0.0);
  PMT_OMP_FOR
  for (int kk = 0; kk < n; ++kk)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = g.index(i, j, kk);
        const int ijk[3] = {i, j, kk};
        for (int a = 0; a < 3; ++a) {
          if (ijk[a] == n - 1) continue;
          Vec3 face = g.position(i, j, kk);
          face[a] += 0.5 * g.h();
          const double q = grid.factor.phi(face);
          op.weights.face[a][idx] = q * q;
        }
      }
  PMT_OMP_FOR
  for (int kk = 1; kk < n - 1; ++kk)
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) {
        const std::size_t idx = g.index(i, j, kk);
        double d = 0.0;
        for (int a = 0; a < 3; ++a) d += op.weights.face[a][idx] + op.weights.face[a][idx - g.stride(a)];
        op.weights.diag[idx] = d;
      }
  return op;
}

void LaplaceBeltrami::apply_scaled(std::span<const double> in, std::span<double> out) const {
  k::apply_stencil(spec, weights, in, out);
}

Field LaplaceBeltrami::apply(std::span<const double> u) const {
  Field out(spec.size());
  k::apply_stencil(spec, weights, u, out);
  const double h2 = spec.h() * spec.h();
  const auto N = static_cast<std::ptrdiff_t>(out.size());
  PMT_OMP_FOR
  for (std::ptrdiff_t i = 0; i < N; ++i) out[i] = -out[i] / (h2 * phi6[i]);
  return out;
}

SolveStats solve_dirichlet(const LaplaceBeltrami& op, Field& u, const SolverOptions& opts) {
  const GridSpec& g = op.spec;
  const std::size_t N = g.size();
  const int max_iter = opts.max_iterations > 0 ? opts.max_iterations : 50 * g.n();

  // b = -A_IB u_B: apply A to the boundary data alone.
  Field r(N), tmp(N);
  {
    Field ub(N, 0.0);
    const int n = g.n();
    for (int kk = 0; kk < n; ++kk)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          if (g.on_boundary(i, j, kk)) ub[g.index(i, j, kk)] = u[g.index(i, j, kk)];
    op.apply_scaled(ub, tmp);
  }
  const double bnorm = std::sqrt(k::dot(tmp, tmp));
  op.apply_scaled(u, r);
  for (std::size_t i = 0; i < N; ++i) r[i] = -r[i];
  double rnorm = std::sqrt(k::dot(r, r));
  const double denom = bnorm > 0.0 ? bnorm : 1.0;

  SolveStats st;
  st.relative_residual = rnorm / denom;
  if (st.relative_residual <= opts.tolerance) return st;

  Field inv_diag(N, 0.0);
  for (std::size_t i = 0; i < N; ++i)
    if (op.weights.diag[i] > 0.0) inv_diag[i] = 1.0 / op.weights.diag[i];

  Field z(N), p(N), q(N), e(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) z[i] = r[i] * inv_diag[i];
  p = z;
  double rz = k::dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    op.apply_scaled(p, q);
    const double alpha = rz / k::dot(p, q);
    k::axpy(alpha, p, e);
    k::axpy(-alpha, q, r);
    rnorm = std::sqrt(k::dot(r, r));
    st.iterations = it;
    st.relative_residual = rnorm / denom;
    if (st.relative_residual <= opts.tolerance) {
      k::axpy(1.0, e, u);
      return st;
    }
    const auto n = static_cast<std::ptrdiff_t>(N);
    PMT_OMP_FOR
    for (std::ptrdiff_t i = 0; i < n; ++i) z[i] = r[i] * inv_diag[i];
    const double rz_new = k::dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    PMT_OMP_FOR
    for (std::ptrdiff_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("conjugate gradients did not reach relative residual " + std::to_string(opts.tolerance) +
                    " in " + std::to_string(max_iter) + " iterations (last " +
                    std::to_string(st.relative_residual) + "); operator is not SPD?");
}

Field solve_harmonic(const LaplaceBeltrami& op, const BoundaryData& boundary, const BoundaryData& guess,
                     SolveStats* stats, const SolverOptions& opts) {
  const GridSpec& g = op.spec;
  Field u(g.size());
  const int n = g.n();
  for (int kk = 0; kk < n; ++kk)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Vec3 x = g.position(i, j, kk);
        u[g.index(i, j, kk)] = g.on_boundary(i, j, kk) ? boundary(x) : guess(x);
      }
  const SolveStats st = solve_dirichlet(op, u, opts);
  if (stats) *stats = st;
  return u;
}

Field solve_harmonic(const LaplaceBeltrami& op, int axis, SolveStats* stats, const SolverOptions& opts) {
  if (axis < 0 || axis > 2) throw std::invalid_argument("solve_harmonic: axis must be 0, 1 or 2");
  const auto coord = [axis](const Vec3& x) { return x[axis]; };
  return solve_harmonic(op, coord, coord, stats, opts);
}

void covariant_hessian(const MetricGrid& grid, std::span<const double> u, const std::array<Field, 3>& grad,
                       std::array<Field, 6>& out) {
  const GridSpec& g = grid.spec;
  k::hessian(g, u, grad, out);
  const auto N = static_cast<std::ptrdiff_t>(g.size());
  PMT_OMP_FOR
  for (std::ptrdiff_t s = 0; s < N; ++s) {
    const double phi = grid.phi[s];
    const double dp[3] = {grid.dphi[0][s], grid.dphi[1][s], grid.dphi[2][s]};
    const double du[3] = {grad[0][s], grad[1][s], grad[2][s]};
    const double pd = dp[0] * du[0] + dp[1] * du[1] + dp[2] * du[2];
    const double c = 2.0 / phi;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) {
        // Gamma^k_ij d_k u for g = phi^4 delta
        const double gam = c * (dp[j] * du[i] + dp[i] * du[j] - (i == j ? pd : 0.0));
        out[kernels::kHessIndex[i][j]][s] -= gam;
      }
  }
}

void finish_triple(const MetricGrid& grid, HarmonicTriple& t) {
  for (int j = 0; j < 3; ++j) {
    k::gradient(grid.spec, t.u[j], t.grad[j]);
    covariant_hessian(grid, t.u[j], t.grad[j], t.hess[j]);
  }
}

HarmonicTriple solve_harmonic_triple(const MetricGrid& grid, const SolverOptions& opts) {
  HarmonicTriple t;
  t.spec = grid.spec;
  const LaplaceBeltrami op = assemble_laplace_beltrami(grid);
  for (int j = 0; j < 3; ++j) {
    SolveStats st;
    t.u[j] = solve_harmonic(op, j, &st, opts);
    t.residual_norm[j] = st.relative_residual;
    t.iterations[j] = st.iterations;
  }
  finish_triple(grid, t);
  return t;
}

double hessian_trace(const MetricGrid& grid, const std::array<Field, 6>& hess, std::size_t idx) {
  return grid.inv_metric[idx] * (hess[0][idx] + hess[1][idx] + hess[2][idx]);
}

}  // namespace pmt
