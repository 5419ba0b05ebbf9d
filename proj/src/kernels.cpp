#include "pmt/kernels.hpp"

#include <cstddef>

#include "pmt/parallel.hpp"

namespace pmt::kernels {

namespace {

inline double stencil_at(const StencilWeights& w, std::span<const double> u, std::size_t idx, std::size_t sy,
                         std::size_t sz) {
  const double c = u[idx];
  return w.diag[idx] * c - w.face[0][idx] * u[idx + 1] - w.face[0][idx - 1] * u[idx - 1] -
         w.face[1][idx] * u[idx + sy] - w.face[1][idx - sy] * u[idx - sy] - w.face[2][idx] * u[idx + sz] -
         w.face[2][idx - sz] * u[idx - sz];
}

inline double diff1(std::span<const double> u, std::size_t idx, std::size_t s, int i, int n, double h) {
  if (i == 0) return (-3.0 * u[idx] + 4.0 * u[idx + s] - u[idx + 2 * s]) / (2.0 * h);
  if (i == n - 1) return (3.0 * u[idx] - 4.0 * u[idx - s] + u[idx - 2 * s]) / (2.0 * h);
  return (u[idx + s] - u[idx - s]) / (2.0 * h);
}

inline void gradient_node(const GridSpec& g, std::span<const double> u, std::array<Field, 3>& out, int i, int j,
                          int k) {
  const std::size_t idx = g.index(i, j, k);
  const int n = g.n();
  const double h = g.h();
  out[0][idx] = diff1(u, idx, g.stride(0), i, n, h);
  out[1][idx] = diff1(u, idx, g.stride(1), j, n, h);
  out[2][idx] = diff1(u, idx, g.stride(2), k, n, h);
}

inline void hessian_node(const GridSpec& g, std::span<const double> u, const std::array<Field, 3>& grad,
                         std::array<Field, 6>& out, int i, int j, int k) {
  const std::size_t idx = g.index(i, j, k);
  const int n = g.n();
  const double h = g.h();
  const std::size_t s[3] = {g.stride(0), g.stride(1), g.stride(2)};
  if (!g.on_boundary(i, j, k)) {
    const double c = u[idx];
    for (int a = 0; a < 3; ++a) out[a][idx] = (u[idx + s[a]] - 2.0 * c + u[idx - s[a]]) / (h * h);
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (int p = 0; p < 3; ++p) {
      const std::size_t sa = s[pairs[p][0]], sb = s[pairs[p][1]];
      out[3 + p][idx] = (u[idx + sa + sb] - u[idx + sa - sb] - u[idx - sa + sb] + u[idx - sa - sb]) / (4.0 * h * h);
    }
    return;
  }
  // Box faces: difference the gradient (one-sided where needed) and symmetrize.
  const int ijk[3] = {i, j, k};
  double d[3][3];
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) d[a][b] = diff1(grad[b], idx, s[a], ijk[a], n, h);
  for (int a = 0; a < 3; ++a) out[a][idx] = d[a][a];
  out[3][idx] = 0.5 * (d[0][1] + d[1][0]);
  out[4][idx] = 0.5 * (d[0][2] + d[2][0]);
  out[5][idx] = 0.5 * (d[1][2] + d[2][1]);
}

}  // namespace

namespace serial {

void apply_stencil(const GridSpec& g, const StencilWeights& w, std::span<const double> in, std::span<double> out) {
  const int n = g.n();
  const std::size_t sy = g.stride(1), sz = g.stride(2);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = g.index(i, j, k);
        out[idx] = g.on_boundary(i, j, k) ? 0.0 : stencil_at(w, in, idx, sy, sz);
      }
}

void gradient(const GridSpec& g, std::span<const double> u, std::array<Field, 3>& out) {
  for (auto& f : out) f.resize(g.size());
  const int n = g.n();
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) gradient_node(g, u, out, i, j, k);
}

void hessian(const GridSpec& g, std::span<const double> u, const std::array<Field, 3>& grad,
             std::array<Field, 6>& out) {
  for (auto& f : out) f.resize(g.size());
  const int n = g.n();
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) hessian_node(g, u, grad, out, i, j, k);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace serial

namespace omp {

void apply_stencil(const GridSpec& g, const StencilWeights& w, std::span<const double> in, std::span<double> out) {
  const int n = g.n();
  const std::size_t sy = g.stride(1), sz = g.stride(2);
  PMT_OMP_FOR
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      const std::size_t row = g.index(0, j, k);
      if (k == 0 || k == n - 1 || j == 0 || j == n - 1) {
        for (int i = 0; i < n; ++i) out[row + i] = 0.0;
        continue;
      }
      out[row] = 0.0;
      out[row + n - 1] = 0.0;
      for (int i = 1; i < n - 1; ++i) out[row + i] = stencil_at(w, in, row + i, sy, sz);
    }
  }
}

void gradient(const GridSpec& g, std::span<const double> u, std::array<Field, 3>& out) {
  for (auto& f : out) f.resize(g.size());
  const int n = g.n();
  PMT_OMP_FOR
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) gradient_node(g, u, out, i, j, k);
}

void hessian(const GridSpec& g, std::span<const double> u, const std::array<Field, 3>& grad,
             std::array<Field, 6>& out) {
  for (auto& f : out) f.resize(g.size());
  const int n = g.n();
  PMT_OMP_FOR
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) hessian_node(g, u, grad, out, i, j, k);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  const auto n = static_cast<std::ptrdiff_t>(a.size());
  PMT_OMP_FOR_REDUCE_SUM(s)
  for (std::ptrdiff_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  PMT_OMP_FOR
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace omp

}  // namespace pmt::kernels
