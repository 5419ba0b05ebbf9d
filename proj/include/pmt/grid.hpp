#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pmt {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline double det3(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Uniform cubic lattice on [-L, L]^3 with spacing h; n nodes per axis.
/// Node (i,j,k) sits at (-L + i h, -L + j h, -L + k h) and is stored at
/// i + n (j + n k).
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(double h, double half_extent) : h_(h), L_(half_extent) {
    if (!(h > 0.0) || !(half_extent > 0.0))
      throw std::invalid_argument("grid: h and L_box must be positive");
    const double cells = 2.0 * half_extent / h;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells))
      throw std::invalid_argument("grid: 2 L_box / h must be an integer");
    if (rounded < 4) throw std::invalid_argument("grid: need at least 4 cells per axis");
    n_ = static_cast<int>(rounded) + 1;
  }

  double h() const { return h_; }
  double half_extent() const { return L_; }
  int n() const { return n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  std::size_t cells() const { return static_cast<std::size_t>(n_ - 1) * (n_ - 1) * (n_ - 1); }

  double coord(int i) const { return -L_ + i * h_; }
  Vec3 position(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
  Vec3 position(std::size_t idx) const {
    int i, j, k;
    unravel(idx, i, j, k);
    return position(i, j, k);
  }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_) * (j + static_cast<std::size_t>(n_) * k);
  }
  void unravel(std::size_t idx, int& i, int& j, int& k) const {
    i = static_cast<int>(idx % n_);
    j = static_cast<int>((idx / n_) % n_);
    k = static_cast<int>(idx / (static_cast<std::size_t>(n_) * n_));
  }
  std::size_t stride(int axis) const {
    return axis == 0 ? 1 : axis == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
  }

  bool on_boundary(int i, int j, int k) const {
    return i == 0 || j == 0 || k == 0 || i == n_ - 1 || j == n_ - 1 || k == n_ - 1;
  }
  /// Lattice distance (in cells) to the nearest box face.
  int depth(int i, int j, int k) const {
    int d = std::min({i, j, k, n_ - 1 - i, n_ - 1 - j, n_ - 1 - k});
    return d;
  }
  int depth(std::size_t idx) const {
    int i, j, k;
    unravel(idx, i, j, k);
    return depth(i, j, k);
  }
  /// Nearest node index for a point inside the box.
  std::size_t nearest(const Vec3& x) const {
    int ijk[3];
    for (int a = 0; a < 3; ++a) {
      int v = static_cast<int>(std::lround((x[a] + L_) / h_));
      ijk[a] = std::clamp(v, 0, n_ - 1);
    }
    return index(ijk[0], ijk[1], ijk[2]);
  }

  bool operator==(const GridSpec& o) const { return h_ == o.h_ && L_ == o.L_ && n_ == o.n_; }

 private:
  double h_ = 1.0;
  double L_ = 1.0;
  int n_ = 0;
};

using Field = std::vector<double>;
using Mask = std::vector<std::uint8_t>;

}  // namespace pmt
