#include "pmt/mass_analysis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pmt/parallel.hpp"

namespace pmt {

namespace {

// |Hess|_g^2 = phi^-8 sum_ij H_ij^2 for g = phi^4 delta.
double hess_sq_coord(const std::array<Field, 6>& H, std::size_t s) {
  return H[0][s] * H[0][s] + H[1][s] * H[1][s] + H[2][s] * H[2][s] +
         2.0 * (H[3][s] * H[3][s] + H[4][s] * H[4][s] + H[5][s] * H[5][s]);
}

double grad_sq_coord(const std::array<Field, 3>& g, std::size_t s) {
  return g[0][s] * g[0][s] + g[1][s] * g[1][s] + g[2][s] * g[2][s];
}

SupDiagnostic with_constant(double sup, double mass, double exponent) {
  SupDiagnostic d;
  d.sup = sup;
  if (mass > 0.0) d.implied_constant = sup / std::pow(mass, exponent);
  return d;
}

}  // namespace

BkksBound bkks_lower_bound(const MetricGrid& grid, const HarmonicTriple& triple, int j, const BkksOptions& opts) {
  if (j < 0 || j > 2) throw std::invalid_argument("bkks_lower_bound: coordinate index must be 0, 1 or 2");
  const GridSpec& g = grid.spec;
  const auto N = static_cast<std::ptrdiff_t>(g.size());
  const double h3 = g.h() * g.h() * g.h();
  const auto& grad = triple.grad[j];
  const auto& hess = triple.hess[j];
  double sum = 0.0, collar = 0.0;
  std::size_t count = 0;
  bool bad = false;
#ifdef _OPENMP
#pragma omp parallel for reduction(+ : sum, collar, count) reduction(|| : bad) schedule(static)
#endif
  for (std::ptrdiff_t s = 0; s < N; ++s) {
    const double dv = grid.sqrt_g[s] * h3;
    if (g.depth(static_cast<std::size_t>(s)) < opts.collar) {
      collar += dv;
      continue;
    }
    const double inv4 = grid.inv_metric[s];
    const double gnorm = std::sqrt(inv4 * grad_sq_coord(grad, s));
    const double hsq = inv4 * inv4 * hess_sq_coord(hess, s);
    const double f = hsq / std::max(gnorm, opts.eps_grad) + grid.scalar_r[s] * gnorm;
    if (std::isnan(f)) bad = true;
    sum += f * dv;
    ++count;
  }
  if (bad) throw std::runtime_error("bkks_lower_bound: NaN in integrand (corrupted triple or metric)");
  return {sum / (16.0 * std::numbers::pi), collar, count};
}

Mask far_mask(const GridSpec& spec, double r0, int collar) {
  Mask m(spec.size(), 0);
  for (std::size_t s = 0; s < m.size(); ++s)
    m[s] = spec.depth(s) >= collar && norm(spec.position(s)) > r0 ? 1 : 0;
  return m;
}

SupDiagnostic sup_hessian_diagnostic(const MetricGrid& grid, const HarmonicTriple& triple, const Mask& mask,
                                     double mass) {
  const auto N = static_cast<std::ptrdiff_t>(grid.spec.size());
  double sup = 0.0;
  bool any = false;
  PMT_OMP_FOR_REDUCE_MAX(sup)
  for (std::ptrdiff_t s = 0; s < N; ++s) {
    if (!mask[s]) continue;
    for (int j = 0; j < 3; ++j)
      sup = std::max(sup, grid.inv_metric[s] * std::sqrt(hess_sq_coord(triple.hess[j], s)));
  }
  for (auto v : mask) any = any || v;
  if (!any) throw std::invalid_argument("sup_hessian_diagnostic: empty far mask");
  return with_constant(sup, mass, 5.0 / 96.0);
}

SupDiagnostic ortho_defect_sup_diagnostic(const MetricGrid& grid, const HarmonicTriple& triple,
                                          const Mask& mask, double mass) {
  const auto N = static_cast<std::ptrdiff_t>(grid.spec.size());
  double sup = 0.0;
  bool any = false;
  PMT_OMP_FOR_REDUCE_MAX(sup)
  for (std::ptrdiff_t s = 0; s < N; ++s) {
    if (!mask[s]) continue;
    for (int j = 0; j < 3; ++j)
      for (int k = j; k < 3; ++k) {
        double ip = 0.0;
        for (int a = 0; a < 3; ++a) ip += triple.grad[j][a][s] * triple.grad[k][a][s];
        sup = std::max(sup, std::abs(grid.inv_metric[s] * ip - (j == k ? 1.0 : 0.0)));
      }
  }
  for (auto v : mask) any = any || v;
  if (!any) throw std::invalid_argument("ortho_defect_sup_diagnostic: empty far mask");
  return with_constant(sup, mass, 1.0 / 192.0);
}

GradientDecayFit gradient_decay_fit(const MetricGrid& grid, const HarmonicTriple& triple,
                                    const std::vector<double>& radii, int collar) {
  if (radii.size() < 2) throw std::invalid_argument("gradient_decay_fit: need at least two radii");
  const GridSpec& g = grid.spec;
  GradientDecayFit fit;
  fit.radii = radii;
  fit.deviation.assign(radii.size(), 0.0);
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (g.depth(s) < collar) continue;
    const double r = norm(g.position(s));
    for (std::size_t q = 0; q < radii.size(); ++q) {
      if (std::abs(r - radii[q]) > 0.5 * g.h()) continue;
      // |V|_g = phi^2 |V|_E for the raised gradient V = phi^-4 du
      const double phi2 = grid.phi[s] * grid.phi[s];
      for (int j = 0; j < 3; ++j) {
        double e2 = 0.0;
        for (int a = 0; a < 3; ++a) {
          const double d = grid.inv_metric[s] * triple.grad[j][a][s] - (a == j ? 1.0 : 0.0);
          e2 += d * d;
        }
        fit.deviation[q] = std::max(fit.deviation[q], phi2 * std::sqrt(e2));
      }
    }
  }
  bool all_tiny = true;
  for (double d : fit.deviation) all_tiny = all_tiny && d < 1e-12;
  if (all_tiny) {
    fit.exact = true;
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(radii.size());
  for (std::size_t q = 0; q < radii.size(); ++q) {
    const double x = std::log(radii[q]), y = std::log(std::max(fit.deviation[q], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return fit;
}

MassReport analyze_mass(const MetricGrid& grid, const HarmonicTriple& triple, const MassOptions& opts) {
  const double L = grid.spec.half_extent();
  MassReport rep;
  rep.m_exact = grid.factor.m_exact();
  const std::vector<double> adm = opts.adm_radii.empty()
                                      ? std::vector<double>{L / 2.0, 2.0 * L / 3.0, 11.0 * L / 12.0}
                                      : opts.adm_radii;
  rep.m_adm = extrapolate_adm_mass(grid, adm).m_extrapolated;
  for (int j = 0; j < 3; ++j) {
    const BkksBound b = bkks_lower_bound(grid, triple, j, opts.bkks);
    rep.bkks_bound[j] = b.value;
    rep.slack[j] = rep.m_adm - b.value;
    rep.collar_volume = b.collar_volume;
  }
  const Mask far = far_mask(grid.spec, opts.r0, opts.bkks.collar);
  rep.sup_hess = sup_hessian_diagnostic(grid, triple, far, rep.m_exact);
  rep.sup_defect = ortho_defect_sup_diagnostic(grid, triple, far, rep.m_exact);
  std::vector<double> radii = opts.decay_radii;
  if (radii.empty())
    for (int i = 1; i <= 5; ++i) radii.push_back(opts.r0 + (L / 2.0 - opts.r0) * i / 6.0);
  rep.decay = gradient_decay_fit(grid, triple, radii, opts.bkks.collar);
  return rep;
}

}  // namespace pmt
