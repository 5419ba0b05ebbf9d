#include "pmt/radial_oracle.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <stdexcept>

namespace pmt {

namespace odeint = boost::numeric::odeint;

RadialProfile::RadialProfile(std::vector<double> r, std::vector<double> f, std::vector<double> df)
    : r_(std::move(r)), f_(std::move(f)), df_(std::move(df)) {}

double RadialProfile::value(double r) const {
  if (r < 0.0 || r > r_max() * (1.0 + 1e-12)) throw std::out_of_range("radial profile: r outside table");
  const double dr = r_[1] - r_[0];
  std::size_t i = std::min(static_cast<std::size_t>(r / dr), r_.size() - 2);
  const double t = (r - r_[i]) / dr;
  const double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t;
  const double h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
  return h00 * f_[i] + h10 * dr * df_[i] + h01 * f_[i + 1] + h11 * dr * df_[i + 1];
}

double RadialProfile::derivative(double r) const {
  if (r < 0.0 || r > r_max() * (1.0 + 1e-12)) throw std::out_of_range("radial profile: r outside table");
  const double dr = r_[1] - r_[0];
  std::size_t i = std::min(static_cast<std::size_t>(r / dr), r_.size() - 2);
  const double t = (r - r_[i]) / dr;
  const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1;
  const double d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
  return (d00 * f_[i] + d01 * f_[i + 1]) / dr + d10 * df_[i] + d11 * df_[i + 1];
}

RadialProfile radial_ode_oracle(double m_core, double s_reg, double r_max, int table_points) {
  if (!(s_reg > 0.0) || !(m_core >= 0.0) || !(r_max > 0.0) || table_points < 3)
    throw std::invalid_argument("radial_ode_oracle: bad parameters");

  const double hm = 0.5 * m_core, s2 = s_reg * s_reg;
  auto phi = [&](double r) { return 1.0 + hm / std::sqrt(r * r + s2); };
  auto dphi = [&](double r) { return -hm * r / std::pow(r * r + s2, 1.5); };

  using State = std::array<double, 2>;
  auto rhs = [&](const State& y, State& dy, double r) {
    const double p = phi(r), dp = dphi(r);
    dy[0] = y[1];
    dy[1] = -(4.0 / r + 2.0 * dp / p) * y[1] - 2.0 * dp / (r * p) * y[0];
  };

  // regular series f = 1 + c2 r^2 with 10 c2 = -2 phi''(0) / phi(0)
  const double phi0 = phi(0.0);
  const double phi2 = -hm / (s2 * s_reg);  // phi''(0)
  const double c2 = -phi2 / (5.0 * phi0);
  const double r0 = 1e-4;
  State y{1.0 + c2 * r0 * r0, 2.0 * c2 * r0};

  std::vector<double> rs(table_points), fs(table_points), dfs(table_points);
  const double dr = r_max / (table_points - 1);
  for (int i = 0; i < table_points; ++i) rs[i] = i * dr;
  fs[0] = 1.0;
  dfs[0] = 0.0;

  auto stepper = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
  double r = r0;
  std::vector<double> times(rs.begin() + 1, rs.end());
  times.insert(times.begin(), r0);
  std::size_t k = 1;
  odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), 1e-4, [&](const State& s, double t) {
    if (t == r0) return;
    fs[k] = s[0];
    dfs[k] = s[1];
    ++k;
  });
  if (k != static_cast<std::size_t>(table_points))
    throw std::runtime_error("radial_ode_oracle: table not filled");

  // continue to large radius; f ~ alpha (1 - m/2r) + beta r^-3, so alpha = f + r f'
  y = {fs.back(), dfs.back()};
  r = r_max;
  const double r_far = 1e7;
  odeint::integrate_adaptive(odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>()), rhs, y,
                             r, r_far, 1e-2);
  const double alpha = y[0] + r_far * y[1];
  if (!std::isfinite(alpha) || alpha <= 0.0) throw std::runtime_error("radial_ode_oracle: shooting diverged");
  for (int i = 0; i < table_points; ++i) {
    fs[i] /= alpha;
    dfs[i] /= alpha;
  }
  return RadialProfile(std::move(rs), std::move(fs), std::move(dfs));
}

}  // namespace pmt
