#pragma once

#include <array>
#include <optional>
#include <vector>

#include "pmt/elliptic.hpp"

namespace pmt {

struct BkksBound {
  double value = 0.0;
  /// Volume of the excluded boundary collar, phi^6 h^3 summed.
  double collar_volume = 0.0;
  std::size_t nodes = 0;
};

struct BkksOptions {
  int collar = 2;
  double eps_grad = 1e-8;
};

/// (1/16 pi) sum over nodes at depth >= collar of (|Hess u|^2 / |grad u| + R |grad u|) phi^6 h^3.
/// Throws std::runtime_error if the integrand is NaN anywhere.
BkksBound bkks_lower_bound(const MetricGrid& grid, const HarmonicTriple& triple, int j,
                           const BkksOptions& opts = {});

/// Nodes with |x| > r0, excluding the Dirichlet collar where Hessians are one-sided.
Mask far_mask(const GridSpec& spec, double r0, int collar = 2);

struct SupDiagnostic {
  double sup = 0.0;
  /// sup / m^exponent; empty when m == 0.
  std::optional<double> implied_constant;
};

/// sup over the mask of max_j |Hess u^j|_g; implied constant against m^{5/96}.
SupDiagnostic sup_hessian_diagnostic(const MetricGrid& grid, const HarmonicTriple& triple, const Mask& mask,
                                     double mass);
/// sup over the mask of max_{j,k} |<grad u^j, grad u^k>_g - delta_jk|; constant against m^{1/192}.
SupDiagnostic ortho_defect_sup_diagnostic(const MetricGrid& grid, const HarmonicTriple& triple,
                                          const Mask& mask, double mass);

struct GradientDecayFit {
  bool exact = false;  // every sampled deviation below 1e-12
  double exponent = 0.0;
  std::vector<double> radii;
  std::vector<double> deviation;
};

/// Least-squares slope of log max_{|x| ~ r} max_j |grad u^j - d_{x^j}|_g against log r.
/// Shells are nodes with ||x| - r| <= h/2 outside the collar. Throws when fewer than two radii.
GradientDecayFit gradient_decay_fit(const MetricGrid& grid, const HarmonicTriple& triple,
                                    const std::vector<double>& radii, int collar = 2);

struct MassReport {
  double m_exact = 0.0;
  double m_adm = 0.0;
  std::array<double, 3> bkks_bound{};
  std::array<double, 3> slack{};
  double collar_volume = 0.0;
  SupDiagnostic sup_hess;
  SupDiagnostic sup_defect;
  GradientDecayFit decay;
};

struct MassOptions {
  std::vector<double> adm_radii;    // empty: {L/2, 2L/3, 11L/12}
  std::vector<double> decay_radii;  // empty: 5 radii evenly inside (r0, L/2)
  double r0 = 4.0;
  BkksOptions bkks;
};

MassReport analyze_mass(const MetricGrid& grid, const HarmonicTriple& triple, const MassOptions& opts = {});

}  // namespace pmt
