#pragma once

// Independent oracle for bump-free factors. With u = f(r) x^j the flux-form
// equation d_i(phi^2 d_i u) = 0 reduces to
//   f'' + (4/r + 2 phi'/phi) f' + 2 phi' / (r phi) f = 0,
// regular at r = 0 and normalized so that f -> 1 at infinity.

#include <vector>

namespace pmt {

class RadialProfile {
 public:
  RadialProfile() = default;
  RadialProfile(std::vector<double> r, std::vector<double> f, std::vector<double> df);

  double r_max() const { return r_.empty() ? 0.0 : r_.back(); }
  /// Cubic Hermite interpolation of the table; throws outside [0, r_max].
  double value(double r) const;
  double derivative(double r) const;

  const std::vector<double>& radii() const { return r_; }
  const std::vector<double>& values() const { return f_; }

 private:
  std::vector<double> r_, f_, df_;
};

/// Shoots from the regular series at r ~ 0 to r = 1e7 with an adaptive
/// Dormand-Prince integrator and rescales so that f(infinity) = 1.
RadialProfile radial_ode_oracle(double m_core, double s_reg, double r_max, int table_points = 4001);

}  // namespace pmt
