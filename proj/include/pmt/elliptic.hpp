#pragma once

// Discrete Laplace-Beltrami problem for g = phi^4 delta in flux form,
//   Lap_g u = phi^-6 d_i (phi^2 d_i u),
// on the 7-point stencil with face-averaged phi^2, and the harmonic
// coordinates u^j ~ x^j it defines.

#include <functional>
#include <stdexcept>

#include "pmt/kernels.hpp"
#include "pmt/metric_family.hpp"

namespace pmt {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A = -h^2 phi^6 Lap_g restricted to interior rows. A is symmetric with
/// nonpositive off-diagonals and zero row sums, so it is an M-matrix once the
/// Dirichlet columns are eliminated.
struct LaplaceBeltrami {
  GridSpec spec;
  kernels::StencilWeights weights;
  Field phi6;

  void apply_scaled(std::span<const double> in, std::span<double> out) const;
  /// Lap_g u at interior nodes, 0 on the box faces.
  Field apply(std::span<const double> u) const;
};

LaplaceBeltrami assemble_laplace_beltrami(const MetricGrid& grid);

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

struct SolverOptions {
  double tolerance = 1e-10;
  /// 0 selects 50 * nodes-per-axis.
  int max_iterations = 0;
};

/// Jacobi-preconditioned conjugate gradients for the interior unknowns of u;
/// the face values of u are the Dirichlet data and stay fixed. The interior of
/// u is the initial guess. Throws SolverError if the cap is reached.
SolveStats solve_dirichlet(const LaplaceBeltrami& op, Field& u, const SolverOptions& opts = {});

using BoundaryData = std::function<double(const Vec3&)>;

/// Harmonic function with u = x^axis on the box faces (axis 0, 1, 2).
Field solve_harmonic(const LaplaceBeltrami& op, int axis, SolveStats* stats = nullptr,
                     const SolverOptions& opts = {});
/// Same with arbitrary Dirichlet data (used by the oracle comparisons).
Field solve_harmonic(const LaplaceBeltrami& op, const BoundaryData& boundary, const BoundaryData& guess,
                     SolveStats* stats = nullptr, const SolverOptions& opts = {});

/// The three harmonic coordinates with coordinate gradients grad[j][a] = d_a u^j
/// and covariant Hessians hess[j][c] in the (xx, yy, zz, xy, xz, yz) layout.
struct HarmonicTriple {
  GridSpec spec;
  std::array<Field, 3> u;
  std::array<std::array<Field, 3>, 3> grad;
  std::array<std::array<Field, 6>, 3> hess;
  std::array<double, 3> residual_norm{};
  std::array<int, 3> iterations{};
};

/// Nabla^2 u_ij = d_i d_j u - Gamma^k_ij d_k u.
void covariant_hessian(const MetricGrid& grid, std::span<const double> u, const std::array<Field, 3>& grad,
                       std::array<Field, 6>& out);

/// Fills gradients and covariant Hessians of already solved u fields.
void finish_triple(const MetricGrid& grid, HarmonicTriple& triple);

HarmonicTriple solve_harmonic_triple(const MetricGrid& grid, const SolverOptions& opts = {});

/// g^ij Nabla^2 u_ij at one node.
double hessian_trace(const MetricGrid& grid, const std::array<Field, 6>& hess, std::size_t idx);

}  // namespace pmt
