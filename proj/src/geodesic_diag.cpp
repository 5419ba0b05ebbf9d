#include "pmt/geodesic_diag.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <stdexcept>

namespace pmt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum : std::uint8_t { kFar = 0, kTrial = 1, kKnown = 2 };

// One axis of the factored upwind stencil: the one-sided difference of T = T0 tau toward
// the known neighbour is alpha tau_s + beta.
struct AxisTerm {
  double alpha;
  double beta;
  double T_nb;
};

// Largest root of sum_a (alpha_a tau + beta_a)^2 + sum_free (p_a tau)^2 = f^2, or NaN.
double factored_root(const AxisTerm* used, int n_used, const double* p_free, int n_free, double f) {
  double A = 0.0, B = 0.0, C = -f * f;
  for (int i = 0; i < n_used; ++i) {
    A += used[i].alpha * used[i].alpha;
    B += used[i].alpha * used[i].beta;
    C += used[i].beta * used[i].beta;
  }
  for (int i = 0; i < n_free; ++i) A += p_free[i] * p_free[i];
  const double disc = B * B - A * C;
  if (A <= 0.0 || disc < 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (-B + std::sqrt(disc)) / A;
}

}  // namespace

double segment_conformal_length(const ConformalFactor& factor, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double len = norm(d);
  if (len == 0.0) return 0.0;
  const int pieces = std::max(1, static_cast<int>(std::ceil(len)));
  double total = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double t0 = static_cast<double>(p) / pieces, t1 = static_cast<double>(p + 1) / pieces;
    total += boost::math::quadrature::gauss<double, 16>::integrate(
        [&](double t) {
          const double f = factor.phi({a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]});
          return f * f;
        },
        t0, t1);
  }
  return total * len;
}

DistanceField fast_marching(const MetricGrid& grid, std::size_t source, const FastMarchingOptions& opts) {
  const GridSpec& g = grid.spec;
  if (source >= g.size() || g.depth(source) < 1)
    throw std::invalid_argument("fast_marching: source must be an interior node");
  const int n = g.n();
  const double h = g.h();
  DistanceField out;
  out.source = source;
  out.T.assign(g.size(), kInf);
  std::vector<std::uint8_t> state(g.size(), kFar);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  int si, sj, sk;
  g.unravel(source, si, sj, sk);
  const Vec3 xs = g.position(source);
  const int R = static_cast<int>(std::floor(opts.init_radius_cells));
  for (int dk = -R; dk <= R; ++dk)
    for (int dj = -R; dj <= R; ++dj)
      for (int di = -R; di <= R; ++di) {
        const int i = si + di, j = sj + dj, k = sk + dk;
        if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) continue;
        if (di * di + dj * dj + dk * dk > opts.init_radius_cells * opts.init_radius_cells) continue;
        const std::size_t s = g.index(i, j, k);
        out.T[s] = segment_conformal_length(grid.factor, xs, g.position(s));
        state[s] = kKnown;
      }
  // Factored form T = T0 tau with T0 = phi(source)^2 |x - x_s| removes the point-source
  // singularity, so the first-order scheme converges at first order globally.
  const double f0 = grid.phi[source] * grid.phi[source];
  auto relax = [&](std::size_t s) {
    int ijk[3];
    g.unravel(s, ijk[0], ijk[1], ijk[2]);
    const Vec3 dx = g.position(s) - xs;
    const double r = norm(dx);
    const double T0 = f0 * r;
    AxisTerm terms[3];
    double p[3];
    bool has[3];
    for (int a = 0; a < 3; ++a) {
      p[a] = f0 * dx[a] / r;
      has[a] = false;
      double best = kInf;
      int best_dir = 0;
      for (int dir : {-1, 1}) {
        const int v = ijk[a] + dir;
        if (v < 0 || v >= n) continue;
        const std::size_t nb = dir > 0 ? s + g.stride(a) : s - g.stride(a);
        if (state[nb] == kKnown && out.T[nb] < best) {
          best = out.T[nb];
          best_dir = dir;
        }
      }
      if (best_dir == 0) continue;
      has[a] = true;
      // neighbour at x_s + dir h e_a; d_a T ~ (T_s - T_nb) / (-dir h)
      const Vec3 xnb = g.position(s) + Vec3{a == 0 ? best_dir * h : 0.0, a == 1 ? best_dir * h : 0.0,
                                            a == 2 ? best_dir * h : 0.0};
      const double T0nb = f0 * norm(xnb - xs);
      const double tau_nb = T0nb > 0.0 ? best / T0nb : 1.0;
      const double sh = -best_dir * h;
      terms[a] = {p[a] + T0 / sh, -T0 * tau_nb / sh, best};
    }
    const double phi = grid.phi[s];
    const double f = phi * phi;
    double cand = kInf;
    double cand_by_size[4] = {kInf, kInf, kInf, kInf};
    for (int subset = 1; subset < 8; ++subset) {
      AxisTerm used[3];
      double free_p[3];
      int nu = 0, nf = 0;
      bool ok = true;
      for (int a = 0; a < 3; ++a) {
        if (subset & (1 << a)) {
          if (!has[a]) ok = false;
          else used[nu++] = terms[a];
        } else if (has[a]) {
          // an upwind axis left out of the stencil keeps tau frozen along it
          free_p[nf++] = p[a];
        }
        // an axis with no known neighbour is a local minimum of T along it: d_a T = 0
      }
      if (!ok) continue;
      const double tau = factored_root(used, nu, free_p, nf, f);
      if (!std::isfinite(tau)) continue;
      const double T = tau * T0;
      bool upwind = true;
      for (int i = 0; i < nu; ++i) upwind = upwind && T >= used[i].T_nb;
      if (upwind) cand_by_size[nu] = std::min(cand_by_size[nu], T);
    }
    for (int size = 3; size >= 1 && !std::isfinite(cand); --size) cand = cand_by_size[size];
    if (cand < out.T[s]) {
      out.T[s] = cand;
      state[s] = kTrial;
      heap.emplace(cand, s);
    }
  };
  auto neighbours = [&](std::size_t s, auto&& fn) {
    int ijk[3];
    g.unravel(s, ijk[0], ijk[1], ijk[2]);
    for (int a = 0; a < 3; ++a)
      for (int dir : {-1, 1}) {
        const int v = ijk[a] + dir;
        if (v < 0 || v >= n) continue;
        fn(dir > 0 ? s + g.stride(a) : s - g.stride(a));
      }
  };
  for (std::size_t s = 0; s < g.size(); ++s)
    if (state[s] == kKnown)
      neighbours(s, [&](std::size_t nb) {
        if (state[nb] != kKnown) relax(nb);
      });

  while (!heap.empty()) {
    const auto [t, s] = heap.top();
    heap.pop();
    if (state[s] == kKnown || t > out.T[s]) continue;
    state[s] = kKnown;
    neighbours(s, [&](std::size_t nb) {
      if (state[nb] != kKnown) relax(nb);
    });
  }
  return out;
}

std::vector<int> mask_depth(const GridSpec& spec, const Mask& mask) {
  const int n = spec.n();
  std::vector<int> depth(spec.size(), std::numeric_limits<int>::max());
  std::deque<std::size_t> q;
  for (std::size_t s = 0; s < spec.size(); ++s)
    if (!mask[s]) {
      depth[s] = 0;
      q.push_back(s);
    }
  // nodes on the box faces border the (implicit) outside
  for (std::size_t s = 0; s < spec.size(); ++s)
    if (mask[s] && spec.depth(s) == 0) {
      depth[s] = 1;
      q.push_back(s);
    }
  while (!q.empty()) {
    const std::size_t s = q.front();
    q.pop_front();
    int ijk[3];
    spec.unravel(s, ijk[0], ijk[1], ijk[2]);
    for (int a = 0; a < 3; ++a)
      for (int dir : {-1, 1}) {
        const int v = ijk[a] + dir;
        if (v < 0 || v >= n) continue;
        const std::size_t nb = dir > 0 ? s + spec.stride(a) : s - spec.stride(a);
        if (depth[nb] > depth[s] + 1) {
          depth[nb] = depth[s] + 1;
          q.push_back(nb);
        }
      }
  }
  return depth;
}

ChartDistanceReport chart_distance_comparison(const GridSpec& spec, const HarmonicTriple& triple, const Mask& mask,
                                              const std::vector<DistanceField>& fields,
                                              const ChartDistanceOptions& opts) {
  ChartDistanceReport rep;
  const double delta = opts.delta > 0.0 ? opts.delta : 2.0 * spec.h();
  const int need = static_cast<int>(std::ceil(delta / spec.h() - 1e-9));
  const std::vector<int> depth = mask_depth(spec, mask);
  std::vector<std::size_t> deep;
  for (std::size_t s = 0; s < spec.size(); ++s)
    if (mask[s] && depth[s] >= need) deep.push_back(s);
  if (deep.empty()) return rep;

  auto U = [&](std::size_t s) { return Vec3{triple.u[0][s], triple.u[1][s], triple.u[2][s]}; };
  std::mt19937_64 rng(opts.seed);
  double sum = 0.0;
  for (const DistanceField& f : fields) {
    const std::size_t y = f.source;
    if (!mask[y] || depth[y] < need) continue;
    const Vec3 uy = U(y), xy = spec.position(y);
    std::size_t taken = 0;
    for (std::size_t draw = 0; draw < 20 * opts.pairs_per_source && taken < opts.pairs_per_source; ++draw) {
      const std::size_t z = deep[rng() % deep.size()];
      if (norm(spec.position(z) - xy) < opts.min_separation) continue;
      const double d = f.T[z];
      if (!std::isfinite(d) || d <= 0.0) continue;
      const double e = std::abs(norm(U(z) - uy) - d);
      rep.max_abs = std::max(rep.max_abs, e);
      rep.normalized.push_back(e / d);
      rep.max_normalized = std::max(rep.max_normalized, e / d);
      sum += e / d;
      ++taken;
    }
    rep.pairs += taken;
  }
  if (rep.pairs) rep.mean_normalized = sum / static_cast<double>(rep.pairs);
  return rep;
}

double model_ball_volume(double Lambda, double r) {
  if (Lambda < 0.0 || r < 0.0) throw std::invalid_argument("model_ball_volume: negative argument");
  const double a = std::sqrt(Lambda), x = a * r;
  if (x < 1e-2) {
    // sinh^2(at)/a^2 = t^2 + a^2 t^4 / 3 + 2 a^4 t^6 / 45 + ...
    const double r3 = r * r * r;
    return 4.0 * std::numbers::pi * (r3 / 3.0 + Lambda * r3 * r * r / 15.0 + 2.0 * Lambda * Lambda * r3 * r3 * r / 315.0);
  }
  return 4.0 * std::numbers::pi / Lambda * (std::sinh(2.0 * x) / (4.0 * a) - 0.5 * r);
}

BishopGromovReport bishop_gromov_check(const MetricGrid& grid, const DistanceField& dist, double Lambda,
                                       const std::vector<double>& radii, double slack) {
  if (radii.empty()) throw std::invalid_argument("bishop_gromov_check: no radii");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1])))
      throw std::invalid_argument("bishop_gromov_check: radii must be positive and increasing");
  if (!(Lambda >= 0.0)) throw std::invalid_argument("bishop_gromov_check: Lambda must be nonnegative");
  const GridSpec& g = grid.spec;
  const double h = g.h(), h3 = h * h * h;
  BishopGromovReport rep;
  rep.radii = radii;
  rep.volumes.assign(radii.size(), 0.0);
  for (std::size_t s = 0; s < g.size(); ++s) {
    const double T = dist.T[s];
    const double width = grid.phi[s] * grid.phi[s] * h;
    for (std::size_t q = 0; q < radii.size(); ++q) {
      const double w = std::clamp((radii[q] - T) / width + 0.5, 0.0, 1.0);
      if (w <= 0.0) continue;
      if (g.depth(s) == 0)
        throw std::invalid_argument("bishop_gromov_check: geodesic ball reaches the box boundary");
      rep.volumes[q] += w * grid.sqrt_g[s] * h3;
    }
  }
  for (std::size_t q = 0; q < radii.size(); ++q) rep.ratios.push_back(rep.volumes[q] / model_ball_volume(Lambda, radii[q]));
  for (std::size_t q = 1; q < radii.size(); ++q)
    rep.worst_increase = std::max(rep.worst_increase, rep.ratios[q] / rep.ratios[q - 1] - 1.0);
  rep.monotone = rep.worst_increase <= slack;
  return rep;
}

}  // namespace pmt
