#pragma once

// Data-parallel grid kernels. Every kernel has a plain serial reference in
// kernels::serial and an OpenMP version in kernels::omp with identical
// results (bitwise for the pointwise kernels; reductions may differ in the
// last bits because of summation order). The rest of the library calls the
// OpenMP versions; the serial ones are kept for tests and benchmarks.

#include <array>
#include <span>

#include "pmt/grid.hpp"

namespace pmt::kernels {

/// Face weights of the 7-point flux stencil. face[a][idx] couples node idx with
/// idx + stride(a); diag[idx] is the sum of the six weights around idx.
struct StencilWeights {
  std::array<Field, 3> face;
  Field diag;
};

namespace serial {

/// out = A in on interior nodes, out = 0 on the boundary, with
/// (A u)_i = sum_faces w (u_i - u_nb).
void apply_stencil(const GridSpec& g, const StencilWeights& w, std::span<const double> in, std::span<double> out);
/// Central differences inside, one-sided second order on the box faces.
void gradient(const GridSpec& g, std::span<const double> u, std::array<Field, 3>& out);
/// Six components (xx, yy, zz, xy, xz, yz) of the coordinate Hessian. Uses the
/// precomputed gradient near the faces.
void hessian(const GridSpec& g, std::span<const double> u, const std::array<Field, 3>& grad,
             std::array<Field, 6>& out);
double dot(std::span<const double> a, std::span<const double> b);
/// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace serial

namespace omp {

void apply_stencil(const GridSpec& g, const StencilWeights& w, std::span<const double> in, std::span<double> out);
void gradient(const GridSpec& g, std::span<const double> u, std::array<Field, 3>& out);
void hessian(const GridSpec& g, std::span<const double> u, const std::array<Field, 3>& grad,
             std::array<Field, 6>& out);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace omp

// Hessian component layout.
inline constexpr int kHessIndex[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};

}  // namespace pmt::kernels
