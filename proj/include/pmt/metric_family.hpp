#pragma once

// Conformally flat asymptotically flat metrics g = phi^4 delta on R^3.
//
// phi = 1 + m_core / (2 sqrt(|x|^2 + s^2)) + sum_k M_k erf(|x - c_k| / w_k) / |x - c_k|
// with M_k = a_k pi^{3/2} w_k^3. Each bump term is the Newtonian potential of the
// Gaussian density a_k exp(-|x - c_k|^2 / w_k^2), so phi is superharmonic and the
// scalar curvature R = -8 phi^{-5} Laplacian(phi) is nonnegative everywhere.

#include <string>
#include <vector>

#include "pmt/grid.hpp"

namespace pmt {

struct AFParams {
  double A = 1.0;
  double B = 10.0;
  double sigma = 1.0;
};

struct Bump {
  Vec3 center{0.0, 0.0, 0.0};
  double amplitude = 0.0;
  double width = 1.0;

  bool operator==(const Bump&) const = default;
};

/// Value, gradient, Hessian and Laplacian of phi at one point.
struct PhiJet {
  double value = 1.0;
  Vec3 grad{0.0, 0.0, 0.0};
  Mat3 hess{};
  double laplacian = 0.0;
};

using Christoffel = std::array<Mat3, 3>;  // gamma[k][i][j] = Gamma^k_{ij}

class ConformalFactor {
 public:
  /// Flat space.
  ConformalFactor() = default;
  /// Throws std::invalid_argument on s_reg <= 0, width <= 0, m_core < 0 or amplitude < 0.
  ConformalFactor(double m_core, double s_reg, std::vector<Bump> bumps);

  double m_core() const { return m_core_; }
  double s_reg() const { return s_reg_; }
  const std::vector<Bump>& bumps() const { return bumps_; }
  bool bump_free() const { return bumps_.empty(); }

  /// ADM mass read off the 1/(2r) coefficient of phi.
  double m_exact() const;

  double phi(const Vec3& x) const;
  PhiJet jet(const Vec3& x) const;

  /// Same factor with bump centers mapped through an orthogonal matrix.
  ConformalFactor rotated(const Mat3& rotation) const;

  bool operator==(const ConformalFactor&) const = default;

 private:
  double m_core_ = 0.0;
  double s_reg_ = 1.0;
  std::vector<Bump> bumps_;
};

ConformalFactor build_conformal_factor(double m_core, double s_reg, std::vector<Bump> bumps);

double scalar_curvature(const ConformalFactor& factor, const Vec3& x);
Christoffel christoffel(const ConformalFactor& factor, const Vec3& x);
Christoffel christoffel_from_phi(double phi, const Vec3& grad_phi);

/// Coordinate components of the Ricci tensor of phi^4 delta.
Mat3 ricci_tensor(const ConformalFactor& factor, const Vec3& x);

/// Smallest Lambda >= 0 with Ric >= -2 Lambda g at x (pointwise, from the closed-form
/// conformal Ricci tensor). Offline helper for the shipped corpus constants.
double ricci_lambda_at(const ConformalFactor& factor, const Vec3& x);

struct DecayReport {
  std::vector<double> radii;
  /// ratios[r][k] = max over the sphere of |d^k (g - delta)| |x|^{sigma + k} / B.
  std::vector<std::array<double, 3>> ratios;
  bool pass = true;
};

/// Samples each sphere on a Fibonacci lattice (n_points per sphere).
DecayReport check_af_decay(const ConformalFactor& factor, const AFParams& params,
                           const std::vector<double>& sample_radii, int n_points = 256);

/// Discretization carrier for g = phi^4 delta. Every array is node-indexed.
struct MetricGrid {
  GridSpec spec;
  ConformalFactor factor;
  Field phi;
  std::array<Field, 3> dphi;
  Field lap_phi;
  Field sqrt_g;     // phi^6
  Field inv_metric; // phi^-4
  Field scalar_r;
};

MetricGrid build_metric_grid(const ConformalFactor& factor, const GridSpec& spec);

/// (1/16 pi) * surface integral over S_r of sum_jk (g_jk,j - g_jj,k) v^k dA using
/// n_lon uniform longitudes times n_lat Gauss-Legendre latitudes. Throws when r is
/// outside (inner_radius, L_box).
double adm_mass_boundary_integral(const MetricGrid& grid, double r, double inner_radius = 0.0,
                                  int n_lon = 64, int n_lat = 32);
double adm_mass_sphere(const ConformalFactor& factor, double r, int n_lon = 64, int n_lat = 32);

struct AdmEstimate {
  std::vector<double> radii;
  std::vector<double> m_r;
  double m_extrapolated = 0.0;
  /// max_r r |m_r - m_exact|
  double error_constant = 0.0;
};

/// Polynomial extrapolation in 1/r through all supplied radii.
AdmEstimate extrapolate_adm_mass(const MetricGrid& grid, const std::vector<double>& radii,
                                 double inner_radius = 0.0);

/// Lagrange extrapolation of (x_i, y_i) to x = 0.
double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pmt
