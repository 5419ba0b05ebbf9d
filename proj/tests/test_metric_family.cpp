#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pmt/metric_family.hpp"

using namespace pmt;

namespace {

constexpr double kPi = std::numbers::pi;

ConformalFactor schwarzschild(double m = 0.2, double s = 0.5) { return build_conformal_factor(m, s, {}); }

ConformalFactor bump_example() {
  return build_conformal_factor(0.1, 0.5, {Bump{{3.0, 0.0, 0.0}, 0.01, 1.0}});
}

ConformalFactor random_factor(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Bump> bumps;
  const int nb = static_cast<int>(rng() % 4);
  for (int k = 0; k < nb; ++k)
    bumps.push_back({{4 * U(rng) - 2, 4 * U(rng) - 2, 4 * U(rng) - 2}, 0.05 * U(rng), 0.3 + U(rng)});
  return build_conformal_factor(0.3 * U(rng), 0.2 + U(rng), bumps);
}

// Spherically symmetric closed form of the flux: m_r = -2 r^2 phi^3 phi'.
double schwarzschild_flux(double m, double s, double r) {
  const double phi = 1.0 + 0.5 * m / std::sqrt(r * r + s * s);
  const double dphi = -0.5 * m * r / std::pow(r * r + s * s, 1.5);
  return -2.0 * r * r * phi * phi * phi * dphi;
}

}  // namespace

TEST_CASE("flat factor") {
  const ConformalFactor f = build_conformal_factor(0.0, 1.0, {});
  CHECK(f.m_exact() == 0.0);
  for (const Vec3& x : {Vec3{0, 0, 0}, Vec3{1, -2, 3}, Vec3{100, 0, 0}}) {
    CHECK(f.phi(x) == 1.0);
    CHECK(scalar_curvature(f, x) == 0.0);
    const Christoffel G = christoffel(f, x);
    for (const auto& m : G)
      for (const auto& row : m)
        for (double v : row) CHECK(v == 0.0);
  }
}

TEST_CASE("exact mass") {
  CHECK(schwarzschild().m_exact() == doctest::Approx(0.2).epsilon(1e-15));
  const double expected = 0.1 + 2.0 * 0.01 * std::pow(kPi, 1.5);
  CHECK(bump_example().m_exact() == doctest::Approx(expected).epsilon(1e-14));
  CHECK(bump_example().m_exact() == doctest::Approx(0.21137).epsilon(1e-4));
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(build_conformal_factor(0.1, 0.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_conformal_factor(0.1, -1.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_conformal_factor(-0.1, 1.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_conformal_factor(0.1, 1.0, {Bump{{0, 0, 0}, 0.1, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(build_conformal_factor(0.1, 1.0, {Bump{{0, 0, 0}, -0.1, 1.0}}), std::invalid_argument);
}

TEST_CASE("scalar curvature at the Schwarzschild core") {
  // Laplacian(phi)(0) = -3 m / (2 s^3) = -2.4, phi(0) = 1.2
  const double R = scalar_curvature(schwarzschild(), {0, 0, 0});
  CHECK(R == doctest::Approx(19.2 / std::pow(1.2, 5)).epsilon(1e-13));
  CHECK(R == doctest::Approx(7.716).epsilon(1e-4));
}

TEST_CASE("scalar curvature is nonnegative") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-6.0, 6.0);
  for (int t = 0; t < 50; ++t) {
    const ConformalFactor f = random_factor(rng);
    for (int s = 0; s < 100; ++s) {
      const Vec3 x{U(rng), U(rng), U(rng)};
      CHECK(scalar_curvature(f, x) >= 0.0);
      CHECK(f.phi(x) > 1.0);
    }
  }
}

TEST_CASE("christoffel symbols") {
  const ConformalFactor f = schwarzschild();
  const Vec3 x{2, 0, 0};
  const Christoffel G = christoffel(f, x);
  const double phi = 1.0 + 0.1 / std::sqrt(4.25);
  const double d1 = -0.1 * 2.0 / std::pow(4.25, 1.5);
  CHECK(G[0][0][0] == doctest::Approx(2.0 * d1 / phi).epsilon(1e-14));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    const Christoffel H = christoffel(random_factor(rng), {U(rng), U(rng), U(rng)});
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(H[k][i][j] == H[k][j][i]);
  }
}

TEST_CASE("analytic derivatives match finite differences at second order") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-2.5, 2.5);
  const ConformalFactor f = build_conformal_factor(
      0.2, 0.5, {Bump{{1, 0.5, 0}, 0.03, 0.7}, Bump{{-1, 0, 0.5}, 0.02, 0.5}, Bump{{0.3, -1, 0.2}, 0.05, 0.4}});
  for (int t = 0; t < 10; ++t) {
    const Vec3 x{U(rng), U(rng), U(rng)};
    const PhiJet J = f.jet(x);
    double err_prev_g = 0, err_prev_l = 0;
    for (double h : {0.04, 0.02, 0.01}) {
      double eg = 0.0, lap = 0.0;
      for (int a = 0; a < 3; ++a) {
        Vec3 p = x, m = x;
        p[a] += h;
        m[a] -= h;
        const double fp = f.phi(p), fm = f.phi(m), f0 = f.phi(x);
        eg = std::max(eg, std::abs((fp - fm) / (2 * h) - J.grad[a]));
        lap += (fp - 2 * f0 + fm) / (h * h);
      }
      const double el = std::abs(lap - J.laplacian);
      if (h < 0.04) {
        CHECK(std::log2(err_prev_g / eg) >= 1.9);
        CHECK(std::log2(err_prev_l / el) >= 1.9);
      }
      err_prev_g = eg;
      err_prev_l = el;
    }
    // Hessian against differenced gradient
    const double h = 1e-5;
    for (int a = 0; a < 3; ++a) {
      Vec3 p = x, m = x;
      p[a] += h;
      m[a] -= h;
      const PhiJet Jp = f.jet(p), Jm = f.jet(m);
      for (int b = 0; b < 3; ++b) CHECK(J.hess[a][b] == doctest::Approx((Jp.grad[b] - Jm.grad[b]) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("bump series and closed form agree across the cutoff") {
  const ConformalFactor f = build_conformal_factor(0.0, 1.0, {Bump{{0, 0, 0}, 0.1, 1.0}});
  for (double d : {0.4999999, 0.5000001}) {
    const PhiJet J = f.jet({d, 0, 0});
    const PhiJet K = f.jet({d * (1 + 1e-9), 0, 0});
    CHECK(J.value == doctest::Approx(K.value).epsilon(1e-8));
    CHECK(J.laplacian == doctest::Approx(K.laplacian).epsilon(1e-7));
  }
  // removable singularity: Laplacian(phi)(c) = -4 pi rho(c) = -4 pi a
  CHECK(f.jet({0, 0, 0}).laplacian == doctest::Approx(-4.0 * kPi * 0.1).epsilon(1e-13));
  CHECK(f.jet({1e-9, 0, 0}).laplacian == doctest::Approx(-4.0 * kPi * 0.1).epsilon(1e-12));
  // away from the center: Laplacian = -4 pi a exp(-d^2/w^2)
  CHECK(f.jet({1.3, 0.4, 0}).laplacian == doctest::Approx(-4.0 * kPi * 0.1 * std::exp(-(1.69 + 0.16))).epsilon(1e-10));
}

TEST_CASE("AF decay check") {
  const std::vector<double> radii{4, 8, 16};
  const ConformalFactor flat = build_conformal_factor(0.0, 1.0, {});
  const DecayReport rf = check_af_decay(flat, {1.0, 10.0, 1.0}, radii);
  CHECK(rf.pass);
  for (const auto& r : rf.ratios)
    for (double v : r) CHECK(v == 0.0);

  const DecayReport rs = check_af_decay(schwarzschild(), {1.0, 10.0, 1.0}, radii);
  CHECK(rs.pass);
  // |phi^4 - 1| r ~ 2m: ratio ~ 0.04 at B = 10
  CHECK(rs.ratios.back()[0] == doctest::Approx(0.04).epsilon(0.05));

  const DecayReport bad = check_af_decay(schwarzschild(), {1.0, 1.0, 1.5}, {16, 64, 1024});
  CHECK_FALSE(bad.pass);
  CHECK(bad.ratios[2][0] > bad.ratios[1][0]);
  CHECK(bad.ratios[1][0] > bad.ratios[0][0]);
  CHECK_THROWS_AS(check_af_decay(flat, {5.0, 1.0, 1.0}, {4}), std::invalid_argument);
}

TEST_CASE("ADM mass boundary integral") {
  const MetricGrid coarse = build_metric_grid(schwarzschild(), GridSpec(5.0, 40.0));
  std::vector<double> inv, mr;
  for (double r : {8.0, 16.0, 32.0}) {
    const double m = adm_mass_boundary_integral(coarse, r, 1.0);
    CHECK(m == doctest::Approx(schwarzschild_flux(0.2, 0.5, r)).epsilon(1e-12));
    inv.push_back(1.0 / r);
    mr.push_back(m);
  }
  CHECK(mr[0] > mr[1]);
  CHECK(mr[1] > mr[2]);
  CHECK(std::abs(extrapolate_to_zero(inv, mr) - 0.2) < 0.01 * 0.2);

  const MetricGrid flat = build_metric_grid(ConformalFactor{}, GridSpec(5.0, 40.0));
  CHECK(adm_mass_boundary_integral(flat, 10.0) == 0.0);

  const MetricGrid bump = build_metric_grid(bump_example(), GridSpec(5.0, 40.0));
  const AdmEstimate est = extrapolate_adm_mass(bump, {8.0, 16.0, 32.0}, 1.0);
  CHECK(std::abs(est.m_extrapolated - bump_example().m_exact()) < 0.01 * bump_example().m_exact());
  // high-resolution quadrature oracle
  for (double r : {8.0, 16.0})
    CHECK(adm_mass_sphere(bump_example(), r) == doctest::Approx(adm_mass_sphere(bump_example(), r, 256, 64)).epsilon(1e-9));

  CHECK_THROWS_AS(adm_mass_boundary_integral(coarse, 0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(adm_mass_boundary_integral(coarse, 41.0, 1.0), std::invalid_argument);
}

TEST_CASE("ADM integral is rotation equivariant") {
  const ConformalFactor f = build_conformal_factor(
      0.05, 0.5, {Bump{{1, 0.5, 0}, 0.03, 0.7}, Bump{{-1, 0, 0.5}, 0.02, 0.5}});
  const double t = 0.7;
  const Mat3 R{{{std::cos(t), -std::sin(t), 0}, {std::sin(t), std::cos(t), 0}, {0, 0, 1}}};
  const Mat3 Q{{{1, 0, 0}, {0, std::cos(1.1), -std::sin(1.1)}, {0, std::sin(1.1), std::cos(1.1)}}};
  for (double r : {6.0, 9.0}) {
    const double m0 = adm_mass_sphere(f, r);
    CHECK(adm_mass_sphere(f.rotated(R), r) == doctest::Approx(m0).epsilon(1e-9));
    CHECK(adm_mass_sphere(f.rotated(Q), r) == doctest::Approx(m0).epsilon(1e-9));
  }
}

TEST_CASE("metric grid invariants") {
  const GridSpec spec(0.5, 4.0);
  CHECK(spec.n() == 17);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const MetricGrid g = build_metric_grid(random_factor(rng), spec);
    for (std::size_t i = 0; i < spec.size(); ++i) {
      CHECK(std::isfinite(g.phi[i]));
      CHECK(g.phi[i] >= 1.0);
      CHECK(g.scalar_r[i] >= 0.0);
      CHECK(g.sqrt_g[i] == doctest::Approx(std::pow(g.phi[i], 6)));
    }
  }
  CHECK_THROWS_AS(GridSpec(0.3, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(-0.5, 4.0), std::invalid_argument);
}

TEST_CASE("Ricci tensor traces to the scalar curvature") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    const ConformalFactor f = random_factor(rng);
    const Vec3 x{U(rng), U(rng), U(rng)};
    const Mat3 ric = ricci_tensor(f, x);
    const double tr = (ric[0][0] + ric[1][1] + ric[2][2]) / std::pow(f.phi(x), 4);
    CHECK(tr == doctest::Approx(scalar_curvature(f, x)).epsilon(1e-9).scale(1e-12));
    CHECK(ricci_lambda_at(f, x) >= 0.0);
  }
  CHECK(ricci_lambda_at(ConformalFactor{}, {1, 2, 3}) == 0.0);
}
