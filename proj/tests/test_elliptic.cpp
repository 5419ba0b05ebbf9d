#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "pmt/elliptic.hpp"
#include "pmt/radial_oracle.hpp"

using namespace pmt;

namespace {

ConformalFactor schwarzschild(double m = 0.2, double s = 0.5) { return build_conformal_factor(m, s, {}); }

struct OracleError {
  double rel_linf;
  int iterations;
};

// Grid solve with the oracle's own Dirichlet data, so only discretization error remains.
OracleError oracle_error(double h, double L, double m = 0.2, double s = 0.5) {
  const MetricGrid grid = build_metric_grid(schwarzschild(m, s), GridSpec(h, L));
  const RadialProfile f = radial_ode_oracle(m, s, std::sqrt(3.0) * L + 1.0);
  const auto exact = [&f](const Vec3& x) { return f.value(norm(x)) * x[0]; };
  const auto guess = [](const Vec3& x) { return x[0]; };
  const LaplaceBeltrami op = assemble_laplace_beltrami(grid);
  SolveStats st;
  const Field u = solve_harmonic(op, exact, guess, &st);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ue = exact(grid.spec.position(i));
    err = std::max(err, std::abs(u[i] - ue));
    scale = std::max(scale, std::abs(ue));
  }
  return {err / scale, st.iterations};
}

}  // namespace

TEST_CASE("operator rows annihilate constants and linears in flat space") {
  const MetricGrid flat = build_metric_grid(ConformalFactor{}, GridSpec(0.5, 3.0));
  const LaplaceBeltrami op = assemble_laplace_beltrami(flat);
  Field one(flat.spec.size(), 1.0), lin(flat.spec.size());
  for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = 2.0 * flat.spec.position(i)[0] - flat.spec.position(i)[2];
  for (double v : op.apply(one)) CHECK(v == 0.0);
  for (double v : op.apply(lin)) CHECK(v == 0.0);

  const MetricGrid curved = build_metric_grid(schwarzschild(), GridSpec(0.5, 3.0));
  const LaplaceBeltrami cop = assemble_laplace_beltrami(curved);
  for (double v : cop.apply(one)) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("operator on x^1 equals the discrete divergence of phi^2 e_1") {
  const MetricGrid g = build_metric_grid(schwarzschild(), GridSpec(0.5, 3.0));
  const LaplaceBeltrami op = assemble_laplace_beltrami(g);
  Field x1(g.spec.size());
  for (std::size_t i = 0; i < x1.size(); ++i) x1[i] = g.spec.position(i)[0];
  const Field r = op.apply(x1);
  const double h = g.spec.h();
  double nonzero = 0.0;
  const int n = g.spec.n();
  for (int k = 1; k < n - 1; ++k)
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) {
        const std::size_t idx = g.spec.index(i, j, k);
        const Vec3 x = g.spec.position(i, j, k);
        const double pp = g.factor.phi({x[0] + 0.5 * h, x[1], x[2]});
        const double pm = g.factor.phi({x[0] - 0.5 * h, x[1], x[2]});
        // flux of phi^2 through the two x-faces, divided by the cell width
        const double div = (pp * pp - pm * pm) / h;
        CHECK(r[idx] == doctest::Approx(div / std::pow(g.phi[idx], 6)).epsilon(1e-9).scale(1e-13));
        nonzero = std::max(nonzero, std::abs(r[idx]));
      }
  CHECK(nonzero > 1e-3);
}

TEST_CASE("operator is an M-matrix and symmetric in the phi^6 inner product") {
  const MetricGrid g = build_metric_grid(
      build_conformal_factor(0.3, 0.5, {Bump{{1, 0, 0}, 0.05, 0.6}}), GridSpec(0.5, 3.0));
  const LaplaceBeltrami op = assemble_laplace_beltrami(g);
  for (const auto& f : op.weights.face)
    for (double w : f) CHECK(w >= 0.0);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    Field a(g.spec.size()), b(g.spec.size());
    const int n = g.spec.n();
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const bool bd = g.spec.on_boundary(i, j, k);
          a[g.spec.index(i, j, k)] = bd ? 0.0 : U(rng);
          b[g.spec.index(i, j, k)] = bd ? 0.0 : U(rng);
        }
    const Field La = op.apply(a), Lb = op.apply(b);
    double ab = 0.0, ba = 0.0, mag = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ab += g.sqrt_g[i] * La[i] * b[i];
      ba += g.sqrt_g[i] * a[i] * Lb[i];
      mag += std::abs(g.sqrt_g[i] * La[i] * b[i]);
    }
    CHECK(std::abs(ab - ba) <= 1e-13 * mag);
  }
}

TEST_CASE("flat solve reproduces the coordinates exactly") {
  const MetricGrid flat = build_metric_grid(ConformalFactor{}, GridSpec(0.5, 4.0));
  const HarmonicTriple t = solve_harmonic_triple(flat);
  for (int j = 0; j < 3; ++j) {
    CHECK(t.iterations[j] == 0);
    for (std::size_t i = 0; i < t.u[j].size(); ++i) {
      const Vec3 x = flat.spec.position(i);
      CHECK(std::abs(t.u[j][i] - x[j]) < 1e-10);
      for (int a = 0; a < 3; ++a) CHECK(t.grad[j][a][i] == (a == j ? 1.0 : 0.0));
      for (int c = 0; c < 6; ++c) CHECK(t.hess[j][c][i] == 0.0);
    }
  }
}

TEST_CASE("solve: maximum principle, odd symmetry, trace identity") {
  const MetricGrid g = build_metric_grid(schwarzschild(), GridSpec(0.25, 4.0));
  const HarmonicTriple t = solve_harmonic_triple(g);
  const GridSpec& s = g.spec;
  const int n = s.n();
  for (int j = 0; j < 3; ++j) {
    CHECK(t.residual_norm[j] <= 1e-10);
    double bmin = 1e300, bmax = -1e300, imin = 1e300, imax = -1e300;
    for (int k = 0; k < n; ++k)
      for (int jj = 0; jj < n; ++jj)
        for (int i = 0; i < n; ++i) {
          const double v = t.u[j][s.index(i, jj, k)];
          if (s.on_boundary(i, jj, k)) {
            bmin = std::min(bmin, v);
            bmax = std::max(bmax, v);
          } else {
            imin = std::min(imin, v);
            imax = std::max(imax, v);
          }
        }
    CHECK(imin >= bmin);
    CHECK(imax <= bmax);
  }
  double asym = 0.0, trace = 0.0;
  for (int k = 0; k < n; ++k)
    for (int jj = 0; jj < n; ++jj)
      for (int i = 0; i < n; ++i) {
        asym = std::max(asym, std::abs(t.u[0][s.index(i, jj, k)] + t.u[0][s.index(n - 1 - i, jj, k)]));
        if (s.depth(i, jj, k) >= 2) trace = std::max(trace, std::abs(hessian_trace(g, t.hess[0], s.index(i, jj, k))));
      }
  CHECK(asym < 1e-8);
  // trace of the covariant Hessian is the (wide-stencil) discrete Laplacian: O(h^2)
  MESSAGE("max |g^ij Hess_ij u| = " << trace);
  CHECK(trace < 0.05);
}

TEST_CASE("quarter-turn equivariance of the triple") {
  // rotation about z by 90 degrees: (x, y, z) -> (-y, x, z)
  const ConformalFactor f = build_conformal_factor(0.1, 0.5, {Bump{{1.0, 0.5, 0.0}, 0.04, 0.6}});
  const Mat3 R{{{0, -1, 0}, {1, 0, 0}, {0, 0, 1}}};
  const GridSpec spec(0.5, 4.0);
  const MetricGrid g0 = build_metric_grid(f, spec), g1 = build_metric_grid(f.rotated(R), spec);
  const HarmonicTriple t0 = solve_harmonic_triple(g0), t1 = solve_harmonic_triple(g1);
  // u1'(Rx) = -u2(x), u2'(Rx) = u1(x), u3'(Rx) = u3(x)
  const int n = spec.n();
  double err = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t a = spec.index(i, j, k);
        const std::size_t b = spec.index(n - 1 - j, i, k);  // R x
        err = std::max(err, std::abs(t1.u[0][b] + t0.u[1][a]));
        err = std::max(err, std::abs(t1.u[1][b] - t0.u[0][a]));
        err = std::max(err, std::abs(t1.u[2][b] - t0.u[2][a]));
      }
  CHECK(err < 1e-8);
}

TEST_CASE("covariant Hessian of quadratics and linears in flat space") {
  const MetricGrid flat = build_metric_grid(ConformalFactor{}, GridSpec(0.5, 2.0));
  Field q(flat.spec.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = std::pow(flat.spec.position(i)[0], 2);
  std::array<Field, 3> grad;
  kernels::omp::gradient(flat.spec, q, grad);
  std::array<Field, 6> H;
  covariant_hessian(flat, q, grad, H);
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(H[0][i] == doctest::Approx(2.0).epsilon(1e-12));
    for (int c = 1; c < 6; ++c) CHECK(std::abs(H[c][i]) < 1e-12);
  }
}

TEST_CASE("radial oracle") {
  const RadialProfile flat = radial_ode_oracle(0.0, 0.5, 10.0);
  for (double r : {0.0, 1.0, 5.0, 10.0}) CHECK(flat.value(r) == doctest::Approx(1.0).epsilon(1e-12));

  const RadialProfile f = radial_ode_oracle(0.2, 0.5, 30.0);
  double prev = -1.0;
  for (double v : f.values()) {
    CHECK(v < 1.0);
    CHECK(v > prev);
    prev = v;
  }
  // far field f ~ 1 - m / (2 r)
  CHECK(1.0 - f.value(30.0) == doctest::Approx(0.1 / 30.0).epsilon(0.02));
  CHECK_THROWS(f.value(31.0));
}

TEST_CASE("grid solve converges to the radial oracle at second order") {
  const OracleError e1 = oracle_error(0.5, 4.0), e2 = oracle_error(0.25, 4.0), e3 = oracle_error(0.125, 4.0);
  const double p1 = std::log2(e1.rel_linf / e2.rel_linf), p2 = std::log2(e2.rel_linf / e3.rel_linf);
  MESSAGE("errors " << e1.rel_linf << " " << e2.rel_linf << " " << e3.rel_linf << " orders " << p1 << " " << p2);
  CHECK(p1 >= 1.9);
  CHECK(p2 >= 1.9);
  CHECK(e2.rel_linf <= 5e-3);
}

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  const MetricGrid g = build_metric_grid(
      build_conformal_factor(0.2, 0.5, {Bump{{0.5, -1.0, 0.25}, 0.03, 0.5}}), GridSpec(0.25, 3.0));
  const LaplaceBeltrami op = assemble_laplace_beltrami(g);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Field u(g.spec.size()), v(g.spec.size());
  for (auto& x : u) x = U(rng);
  for (auto& x : v) x = U(rng);

  Field a(u.size()), b(u.size());
  kernels::serial::apply_stencil(g.spec, op.weights, u, a);
  kernels::omp::apply_stencil(g.spec, op.weights, u, b);
  CHECK(a == b);

  std::array<Field, 3> gs, go;
  kernels::serial::gradient(g.spec, u, gs);
  kernels::omp::gradient(g.spec, u, go);
  for (int c = 0; c < 3; ++c) CHECK(gs[c] == go[c]);

  std::array<Field, 6> hs, ho;
  kernels::serial::hessian(g.spec, u, gs, hs);
  kernels::omp::hessian(g.spec, u, go, ho);
  for (int c = 0; c < 6; ++c) CHECK(hs[c] == ho[c]);

  // reductions may reassociate across threads
  CHECK(kernels::serial::dot(u, v) == doctest::Approx(kernels::omp::dot(u, v)).epsilon(1e-12));
  Field ys = v, yo = v;
  kernels::serial::axpy(0.3, u, ys);
  kernels::omp::axpy(0.3, u, yo);
  CHECK(ys == yo);
}
