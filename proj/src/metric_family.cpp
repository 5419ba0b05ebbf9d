#include "pmt/metric_family.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pmt/parallel.hpp"

namespace pmt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrtPi = 1.7724538509055160273;

// Radial profile F(d) = erf(d/w)/d of one bump with p = F'/d and
// q = (F'' - F'/d)/d^2, so that
//   grad F = p r,  Hess F = q r r^T + p I,  Laplacian F = 3p + q d^2.
struct BumpProfile {
  double F, p, q;
};

// Below this t = d/w the power series is used; above it the closed form loses
// at most ~1/t^4 digits to cancellation in q.
constexpr double kSeriesCutoff = 0.5;
constexpr int kSeriesTerms = 16;

BumpProfile bump_profile(double d, double w) {
  const double t = d / w;
  const double c = 2.0 / (kSqrtPi * w);
  if (t < kSeriesCutoff) {
    // erf(t)/t = (2/sqrt(pi)) sum_n (-1)^n t^{2n} / (n! (2n+1))
    double F = 0.0, p = 0.0, q = 0.0;
    double fact = 1.0;
    const double t2 = t * t;
    double tp = 1.0;  // t^{2n}
    double tpm1 = 0.0, tpm2 = 0.0;
    for (int n = 0; n < kSeriesTerms; ++n) {
      if (n > 0) fact *= n;
      const double a = ((n % 2) ? -1.0 : 1.0) / (fact * (2 * n + 1));
      F += a * tp;
      if (n >= 1) p += 2.0 * n * a * tpm1;
      if (n >= 2) q += 2.0 * n * (2.0 * n - 2.0) * a * tpm2;
      tpm2 = tpm1;
      tpm1 = tp;
      tp *= t2;
    }
    return {c * F, c * p / (w * w), c * q / (w * w * w * w)};
  }
  const double e = c * std::exp(-t * t);  // (2/sqrt(pi)) e^{-t^2} / w
  const double er = std::erf(t);
  const double d2 = d * d, d3 = d2 * d;
  const double F = er / d;
  const double p = e / d2 - er / d3;
  const double Fpp = -2.0 * e / (w * w) - 2.0 * e / d2 + 2.0 * er / d3;
  const double q = (Fpp - p) / d2;
  return {F, p, q};
}

double bump_mass(const Bump& b) { return b.amplitude * kPi * kSqrtPi * b.width * b.width * b.width; }

Vec3 fibonacci_point(int i, int n) {
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  const double z = 1.0 - (2.0 * i + 1.0) / n;
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double th = golden * i;
  return {rho * std::cos(th), rho * std::sin(th), z};
}

}  // namespace

ConformalFactor::ConformalFactor(double m_core, double s_reg, std::vector<Bump> bumps)
    : m_core_(m_core), s_reg_(s_reg), bumps_(std::move(bumps)) {
  if (!(m_core >= 0.0)) throw std::invalid_argument("conformal factor: m_core must be >= 0");
  if (!(s_reg > 0.0)) throw std::invalid_argument("conformal factor: s_reg must be > 0");
  for (const auto& b : bumps_) {
    if (!(b.width > 0.0)) throw std::invalid_argument("conformal factor: bump width must be > 0");
    if (!(b.amplitude >= 0.0))
      throw std::invalid_argument("conformal factor: negative bump amplitude breaks R >= 0");
  }
}

ConformalFactor build_conformal_factor(double m_core, double s_reg, std::vector<Bump> bumps) {
  return ConformalFactor(m_core, s_reg, std::move(bumps));
}

double ConformalFactor::m_exact() const {
  double m = m_core_;
  for (const auto& b : bumps_) m += 2.0 * bump_mass(b);
  return m;
}

double ConformalFactor::phi(const Vec3& x) const {
  double v = 1.0;
  if (m_core_ > 0.0) v += 0.5 * m_core_ / std::sqrt(dot(x, x) + s_reg_ * s_reg_);
  for (const auto& b : bumps_) {
    if (b.amplitude == 0.0) continue;
    const double d = norm(x - b.center);
    v += bump_mass(b) * bump_profile(d, b.width).F;
  }
  return v;
}

PhiJet ConformalFactor::jet(const Vec3& x) const {
  PhiJet J;
  if (m_core_ > 0.0) {
    const double psi = 1.0 / std::sqrt(dot(x, x) + s_reg_ * s_reg_);
    const double psi3 = psi * psi * psi, psi5 = psi3 * psi * psi;
    const double hm = 0.5 * m_core_;
    J.value += hm * psi;
    for (int i = 0; i < 3; ++i) {
      J.grad[i] -= hm * psi3 * x[i];
      for (int j = 0; j < 3; ++j) J.hess[i][j] += hm * (3.0 * psi5 * x[i] * x[j] - (i == j ? psi3 : 0.0));
    }
    J.laplacian -= 3.0 * hm * s_reg_ * s_reg_ * psi5;
  }
  for (const auto& b : bumps_) {
    if (b.amplitude == 0.0) continue;
    const Vec3 r = x - b.center;
    const double d = norm(r);
    const BumpProfile P = bump_profile(d, b.width);
    const double M = bump_mass(b);
    J.value += M * P.F;
    for (int i = 0; i < 3; ++i) {
      J.grad[i] += M * P.p * r[i];
      for (int j = 0; j < 3; ++j) J.hess[i][j] += M * (P.q * r[i] * r[j] + (i == j ? P.p : 0.0));
    }
    J.laplacian += M * (3.0 * P.p + P.q * d * d);
  }
  return J;
}

ConformalFactor ConformalFactor::rotated(const Mat3& rot) const {
  std::vector<Bump> out = bumps_;
  for (auto& b : out) {
    Vec3 c{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c[i] += rot[i][j] * b.center[j];
    b.center = c;
  }
  return ConformalFactor(m_core_, s_reg_, std::move(out));
}

double scalar_curvature(const ConformalFactor& factor, const Vec3& x) {
  const PhiJet J = factor.jet(x);
  return -8.0 * J.laplacian / std::pow(J.value, 5);
}

Christoffel christoffel_from_phi(double phi, const Vec3& g) {
  Christoffel G{};
  const double s = 2.0 / phi;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        G[k][i][j] = s * ((i == k ? g[j] : 0.0) + (j == k ? g[i] : 0.0) - (i == j ? g[k] : 0.0));
  return G;
}

Christoffel christoffel(const ConformalFactor& factor, const Vec3& x) {
  const PhiJet J = factor.jet(x);
  return christoffel_from_phi(J.value, J.grad);
}

Mat3 ricci_tensor(const ConformalFactor& factor, const Vec3& x) {
  // g = e^{2f} delta with f = 2 ln phi:
  //   Ric = -(Hess f - df df) - (Lap f + |df|^2) delta
  const PhiJet J = factor.jet(x);
  Vec3 df{};
  for (int i = 0; i < 3; ++i) df[i] = 2.0 * J.grad[i] / J.value;
  Mat3 hf{};
  double lapf = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      hf[i][j] = 2.0 * J.hess[i][j] / J.value - 2.0 * J.grad[i] * J.grad[j] / (J.value * J.value);
      if (i == j) lapf += hf[i][j];
    }
  const double trace_term = lapf + dot(df, df);
  Mat3 ric{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) ric[i][j] = -(hf[i][j] - df[i] * df[j]) - (i == j ? trace_term : 0.0);
  return ric;
}

double ricci_lambda_at(const ConformalFactor& factor, const Vec3& x) {
  const Mat3 ric = ricci_tensor(factor, x);

  // smallest eigenvalue of a symmetric 3x3 (trigonometric form)
  const double p1 = ric[0][1] * ric[0][1] + ric[0][2] * ric[0][2] + ric[1][2] * ric[1][2];
  const double tr = ric[0][0] + ric[1][1] + ric[2][2];
  double lmin;
  if (p1 == 0.0) {
    lmin = std::min({ric[0][0], ric[1][1], ric[2][2]});
  } else {
    const double qm = tr / 3.0;
    const double p2 = (ric[0][0] - qm) * (ric[0][0] - qm) + (ric[1][1] - qm) * (ric[1][1] - qm) +
                      (ric[2][2] - qm) * (ric[2][2] - qm) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Mat3 Bm{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) Bm[i][j] = (ric[i][j] - (i == j ? qm : 0.0)) / p;
    const double rr = std::clamp(det3(Bm) / 2.0, -1.0, 1.0);
    const double phi_ang = std::acos(rr) / 3.0;
    lmin = qm + 2.0 * p * std::cos(phi_ang + 2.0 * kPi / 3.0);
  }
  const double g_scale = std::pow(factor.phi(x), 4);
  return std::max(0.0, -lmin / (2.0 * g_scale));
}

DecayReport check_af_decay(const ConformalFactor& factor, const AFParams& params,
                           const std::vector<double>& sample_radii, int n_points) {
  DecayReport rep;
  for (double r : sample_radii) {
    if (!(r > params.A)) throw std::invalid_argument("check_af_decay: sample radius must exceed A");
    std::array<double, 3> worst{0.0, 0.0, 0.0};
    for (int i = 0; i < n_points; ++i) {
      const Vec3 x = r * fibonacci_point(i, n_points);
      const PhiJet J = factor.jet(x);
      const double p = J.value;
      // g_uv - delta_uv = (phi^4 - 1) delta_uv; derivatives of phi^4:
      //   d_i phi^4 = 4 phi^3 d_i phi
      //   d_i d_j phi^4 = 4 phi^3 d_ij phi + 12 phi^2 d_i phi d_j phi
      const double k0 = std::abs(p * p * p * p - 1.0);
      double k1 = 0.0, k2 = 0.0;
      for (int a = 0; a < 3; ++a) {
        k1 = std::max(k1, std::abs(4.0 * p * p * p * J.grad[a]));
        for (int b = 0; b < 3; ++b)
          k2 = std::max(k2, std::abs(4.0 * p * p * p * J.hess[a][b] + 12.0 * p * p * J.grad[a] * J.grad[b]));
      }
      const double vals[3] = {k0, k1, k2};
      for (int k = 0; k < 3; ++k)
        worst[k] = std::max(worst[k], vals[k] * std::pow(r, params.sigma + k) / params.B);
    }
    rep.radii.push_back(r);
    rep.ratios.push_back(worst);
    for (double w : worst) rep.pass = rep.pass && (w <= 1.0);
  }
  return rep;
}

MetricGrid build_metric_grid(const ConformalFactor& factor, const GridSpec& spec) {
  MetricGrid g;
  g.spec = spec;
  g.factor = factor;
  const std::size_t N = spec.size();
  g.phi.assign(N, 1.0);
  for (auto& f : g.dphi) f.assign(N, 0.0);
  g.lap_phi.assign(N, 0.0);
  g.sqrt_g.assign(N, 1.0);
  g.inv_metric.assign(N, 1.0);
  g.scalar_r.assign(N, 0.0);
  const auto n = static_cast<std::ptrdiff_t>(N);
  PMT_OMP_FOR
  for (std::ptrdiff_t idx = 0; idx < n; ++idx) {
    const auto u = static_cast<std::size_t>(idx);
    const PhiJet J = factor.jet(spec.position(u));
    const double p = J.value;
    const double p2 = p * p, p4 = p2 * p2;
    g.phi[u] = p;
    for (int a = 0; a < 3; ++a) g.dphi[a][u] = J.grad[a];
    g.lap_phi[u] = J.laplacian;
    g.sqrt_g[u] = p4 * p2;
    g.inv_metric[u] = 1.0 / p4;
    g.scalar_r[u] = -8.0 * J.laplacian / (p4 * p);
  }
  return g;
}

double adm_mass_sphere(const ConformalFactor& factor, double r, int n_lon, int n_lat) {
  if (n_lat != 32 && n_lat != 16 && n_lat != 64)
    throw std::invalid_argument("adm mass: supported latitude counts are 16, 32, 64");
  std::vector<double> nodes, weights;
  auto fill = [&](const auto& absc, const auto& wts) {
    // boost stores the nonnegative half; mirror it
    for (std::size_t i = 0; i < absc.size(); ++i) {
      nodes.push_back(absc[i]);
      weights.push_back(wts[i]);
      if (absc[i] != 0.0) {
        nodes.push_back(-absc[i]);
        weights.push_back(wts[i]);
      }
    }
  };
  if (n_lat == 16) fill(boost::math::quadrature::gauss<double, 16>::abscissa(), boost::math::quadrature::gauss<double, 16>::weights());
  if (n_lat == 32) fill(boost::math::quadrature::gauss<double, 32>::abscissa(), boost::math::quadrature::gauss<double, 32>::weights());
  if (n_lat == 64) fill(boost::math::quadrature::gauss<double, 64>::abscissa(), boost::math::quadrature::gauss<double, 64>::weights());

  const double dlon = 2.0 * kPi / n_lon;
  double sum = 0.0;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const double ct = nodes[a];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int b = 0; b < n_lon; ++b) {
      const double lon = (b + 0.5) * dlon;
      const Vec3 v{st * std::cos(lon), st * std::sin(lon), ct};
      const Vec3 x = r * v;
      const PhiJet J = factor.jet(x);
      const double p3 = J.value * J.value * J.value;
      // partial_i g_jk = 4 phi^3 d_i phi delta_jk
      double integrand = 0.0;
      for (int k = 0; k < 3; ++k) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j) {
          const double g_jk_j = (j == k) ? 4.0 * p3 * J.grad[j] : 0.0;
          const double g_jj_k = 4.0 * p3 * J.grad[k];
          s += g_jk_j - g_jj_k;
        }
        integrand += s * v[k];
      }
      sum += weights[a] * dlon * integrand;
    }
  }
  return sum * r * r / (16.0 * kPi);
}

double adm_mass_boundary_integral(const MetricGrid& grid, double r, double inner_radius, int n_lon, int n_lat) {
  if (!(r > inner_radius) || !(r < grid.spec.half_extent()))
    throw std::invalid_argument("adm mass: radius must lie in (A, L_box)");
  return adm_mass_sphere(grid.factor, r, n_lon, n_lat);
}

double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("extrapolate: size mismatch");
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double l = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i) l *= (0.0 - x[j]) / (x[i] - x[j]);
    v += l * y[i];
  }
  return v;
}

AdmEstimate extrapolate_adm_mass(const MetricGrid& grid, const std::vector<double>& radii, double inner_radius) {
  AdmEstimate est;
  std::vector<double> inv;
  for (double r : radii) {
    est.radii.push_back(r);
    est.m_r.push_back(adm_mass_boundary_integral(grid, r, inner_radius));
    inv.push_back(1.0 / r);
  }
  est.m_extrapolated = extrapolate_to_zero(inv, est.m_r);
  const double me = grid.factor.m_exact();
  for (std::size_t i = 0; i < radii.size(); ++i)
    est.error_constant = std::max(est.error_constant, radii[i] * std::abs(est.m_r[i] - me));
  return est;
}

}  // namespace pmt
