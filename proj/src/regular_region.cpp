#include "pmt/regular_region.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include "pmt/parallel.hpp"

namespace pmt {

const int kKuhnTets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7}, {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 lerp_edge(const Vec3& pa, const Vec3& pb, double fa, double fb) {
  const double t = fa / (fa - fb);
  return {pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]), pa[2] + t * (pb[2] - pa[2])};
}

// Zero set of the linear interpolant of f over one tetrahedron; inside means f <= 0.
template <class Emit>
void tet_level_set(const Vec3 (&p)[4], const double (&f)[4], Emit&& emit) {
  int in[4], out[4], ni = 0, no = 0;
  for (int v = 0; v < 4; ++v) (f[v] <= 0.0 ? in[ni++] : out[no++]) = v;
  if (ni == 0 || no == 0) return;
  if (ni == 1 || no == 1) {
    const int lone = ni == 1 ? in[0] : out[0];
    const int* others = ni == 1 ? out : in;
    emit(std::array<Vec3, 3>{lerp_edge(p[lone], p[others[0]], f[lone], f[others[0]]),
                             lerp_edge(p[lone], p[others[1]], f[lone], f[others[1]]),
                             lerp_edge(p[lone], p[others[2]], f[lone], f[others[2]])});
    return;
  }
  const int a = in[0], b = in[1], c = out[0], d = out[1];
  const Vec3 ac = lerp_edge(p[a], p[c], f[a], f[c]), ad = lerp_edge(p[a], p[d], f[a], f[d]);
  const Vec3 bd = lerp_edge(p[b], p[d], f[b], f[d]), bc = lerp_edge(p[b], p[c], f[b], f[c]);
  emit(std::array<Vec3, 3>{ac, ad, bd});
  emit(std::array<Vec3, 3>{ac, bd, bc});
}

std::size_t corner_index(const GridSpec& g, int i, int j, int k, int corner) {
  return g.index(i + (corner & 1), j + ((corner >> 1) & 1), k + ((corner >> 2) & 1));
}

double triangle_metric_area(const ConformalFactor& factor, const std::array<Vec3, 3>& t) {
  const Vec3 c{(t[0][0] + t[1][0] + t[2][0]) / 3.0, (t[0][1] + t[1][1] + t[2][1]) / 3.0,
               (t[0][2] + t[1][2] + t[2][2]) / 3.0};
  const double p = factor.phi(c);
  return p * p * p * p * euclidean_area(t);
}

double det_sym(double a11, double a22, double a33, double a12, double a13, double a23) {
  return a11 * (a22 * a33 - a23 * a23) - a12 * (a12 * a33 - a23 * a13) + a13 * (a12 * a23 - a22 * a13);
}

}  // namespace

DefectField defect_field(const MetricGrid& grid, const HarmonicTriple& triple) {
  const GridSpec& g = grid.spec;
  const auto N = static_cast<std::ptrdiff_t>(g.size());
  DefectField d;
  d.Q.assign(g.size(), 0.0);
  for (auto& f : d.gram) f.assign(g.size(), 0.0);
  static constexpr int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
  PMT_OMP_FOR
  for (std::ptrdiff_t s = 0; s < N; ++s) {
    double q = 0.0;
    for (int c = 0; c < 6; ++c) {
      const int j = pairs[c][0], k = pairs[c][1];
      double ip = 0.0;
      for (int a = 0; a < 3; ++a) ip += triple.grad[j][a][s] * triple.grad[k][a][s];
      ip *= grid.inv_metric[s];
      d.gram[c][s] = ip;
      const double e = ip - (j == k ? 1.0 : 0.0);
      q += (j == k ? 1.0 : 2.0) * e * e;
    }
    d.Q[s] = q;
  }
  for (int j = 0; j < 3; ++j) d.per_j_gradsq[j] = d.gram[j];

  std::array<Field, 3> dq;
  kernels::omp::gradient(g, d.Q, dq);
  d.gradQ_norm.assign(g.size(), 0.0);
  PMT_OMP_FOR
  for (std::ptrdiff_t s = 0; s < N; ++s)
    d.gradQ_norm[s] =
        std::sqrt(dq[0][s] * dq[0][s] + dq[1][s] * dq[1][s] + dq[2][s] * dq[2][s]) / (grid.phi[s] * grid.phi[s]);
  return d;
}

double euclidean_area(const std::array<Vec3, 3>& t) { return 0.5 * norm(cross(t[1] - t[0], t[2] - t[0])); }

double metric_area(const ConformalFactor& factor, const TriangleMesh& mesh) {
  double a = 0.0;
  for (const auto& t : mesh.triangles) a += triangle_metric_area(factor, t);
  return a;
}

void write_stl(std::ostream& out, const TriangleMesh& mesh, const std::string& name) {
  out << "solid " << name << "\n";
  out.precision(9);
  for (const auto& t : mesh.triangles) {
    Vec3 nrm = cross(t[1] - t[0], t[2] - t[0]);
    const double len = norm(nrm);
    if (len > 0.0) nrm = (1.0 / len) * nrm;
    out << "  facet normal " << nrm[0] << " " << nrm[1] << " " << nrm[2] << "\n    outer loop\n";
    for (const Vec3& v : t) out << "      vertex " << v[0] << " " << v[1] << " " << v[2] << "\n";
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid " << name << "\n";
}

std::array<double, 3> select_tau1(const std::array<Field, 3>& per_j_gradsq, double tau) {
  if (!(tau > 0.0) || !(tau < 0.25)) throw std::invalid_argument("select_tau1: tau must lie in (0, 1/4)");
  const double lo = 0.5 * tau, hi = tau;
  std::array<double, 3> out{};
  for (int j = 0; j < 3; ++j) {
    std::vector<double> vals{lo, hi};
    for (double v : per_j_gradsq[j]) {
      const double x = v - 1.0;
      if (x > lo && x < hi) vals.push_back(x);
    }
    std::sort(vals.begin(), vals.end());
    double best_gap = -1.0, mid = 0.5 * (lo + hi);
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      const double gap = vals[i + 1] - vals[i];
      if (gap > best_gap) {
        best_gap = gap;
        mid = 0.5 * (vals[i] + vals[i + 1]);
      }
    }
    out[j] = mid;
  }
  return out;
}

Mask e1_inner_mask(const GridSpec& spec, const DefectField& defect, const std::array<double, 3>& tau1, double r0) {
  Mask m(spec.size(), 0);
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (norm(spec.position(s)) > r0) continue;
    bool ok = true;
    for (int j = 0; j < 3; ++j) ok = ok && defect.per_j_gradsq[j][s] <= 1.0 + tau1[j];
    m[s] = ok ? 1 : 0;
  }
  return m;
}

Tau2Selection select_tau2(const MetricGrid& grid, const DefectField& defect, double tau1_min, const Mask& region) {
  const GridSpec& g = grid.spec;
  Tau2Selection sel;
  sel.tau1_min = tau1_min;
  const double lo = 0.5 * tau1_min, step = 0.5 * tau1_min / kTau2Candidates;
  for (int c = 0; c < kTau2Candidates; ++c) sel.levels[c] = lo + (c + 0.5) * step;

  const double h3 = g.h() * g.h() * g.h();
  double integral = 0.0;
  bool any = false;
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (!region[s]) continue;
    any = true;
    integral += defect.gradQ_norm[s] * grid.sqrt_g[s] * h3;
  }
  if (!any) {
    sel.region_empty = true;
    sel.tau2 = 0.75 * tau1_min;
    return sel;
  }
  sel.certificate_bound = 2.0 / tau1_min * integral;

  // per-slab partial sums keep the result independent of the thread count
  const int nc = g.n() - 1;
  std::vector<std::array<double, kTau2Candidates>> slab(nc);
  PMT_OMP_FOR
  for (int k = 0; k < nc; ++k) {
    auto& acc = slab[k];
    acc.fill(0.0);
    for (int j = 0; j < nc; ++j)
      for (int i = 0; i < nc; ++i) {
        std::size_t id[8];
        double q[8];
        double qmin = 1e300, qmax = -1e300;
        for (int c = 0; c < 8; ++c) {
          id[c] = corner_index(g, i, j, k, c);
          q[c] = defect.Q[id[c]];
          qmin = std::min(qmin, q[c]);
          qmax = std::max(qmax, q[c]);
        }
        if (qmax < sel.levels.front() || qmin > sel.levels.back()) continue;
        for (const auto& tet : kKuhnTets) {
          bool inside = true;
          for (int v : tet) inside = inside && region[id[v]];
          if (!inside) continue;
          Vec3 p[4];
          double tq[4], tmin = 1e300, tmax = -1e300;
          for (int v = 0; v < 4; ++v) {
            p[v] = g.position(id[tet[v]]);
            tq[v] = q[tet[v]];
            tmin = std::min(tmin, tq[v]);
            tmax = std::max(tmax, tq[v]);
          }
          for (int c = 0; c < kTau2Candidates; ++c) {
            const double t = sel.levels[c];
            if (t < tmin || t >= tmax) continue;
            const double f[4] = {tq[0] - t, tq[1] - t, tq[2] - t, tq[3] - t};
            tet_level_set(p, f, [&](const std::array<Vec3, 3>& tri) {
              acc[c] += triangle_metric_area(grid.factor, tri);
            });
          }
        }
      }
  }
  sel.areas.fill(0.0);
  for (const auto& acc : slab)
    for (int c = 0; c < kTau2Candidates; ++c) sel.areas[c] += acc[c];

  int best = 0;
  for (int c = 1; c < kTau2Candidates; ++c)
    if (sel.areas[c] < sel.areas[best]) best = c;
  sel.tau2 = sel.levels[best];
  sel.chosen_area = sel.areas[best];
  sel.certificate_ok = sel.chosen_area <= sel.certificate_bound;
  return sel;
}

RegularRegion extract_region(const MetricGrid& grid, const DefectField& defect, double tau2, double r0) {
  const GridSpec& g = grid.spec;
  const int n = g.n();
  RegularRegion reg;
  reg.tau2 = tau2;
  reg.mask.assign(g.size(), 0);
  reg.seed_ok = true;

  std::deque<std::size_t> queue;
  for (int k = 1; k < n - 1; ++k)
    for (int j = 1; j < n - 1; ++j)
      for (int i = 1; i < n - 1; ++i) {
        const std::size_t s = g.index(i, j, k);
        if (norm(g.position(i, j, k)) <= r0) continue;
        if (defect.Q[s] <= tau2) {
          reg.mask[s] = 1;
          queue.push_back(s);
        } else {
          reg.seed_ok = false;
        }
      }
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    int ijk[3];
    g.unravel(s, ijk[0], ijk[1], ijk[2]);
    for (int a = 0; a < 3; ++a)
      for (int dir : {-1, 1}) {
        const int v = ijk[a] + dir;
        if (v < 1 || v > n - 2) continue;
        const std::size_t t = dir > 0 ? s + g.stride(a) : s - g.stride(a);
        if (reg.mask[t] || defect.Q[t] > tau2) continue;
        reg.mask[t] = 1;
        queue.push_back(t);
      }
  }

  for (int k = 0; k < n - 1; ++k)
    for (int j = 0; j < n - 1; ++j)
      for (int i = 0; i < n - 1; ++i) {
        std::size_t id[8];
        bool touches = false, above = false;
        for (int c = 0; c < 8; ++c) {
          id[c] = corner_index(g, i, j, k, c);
          touches = touches || reg.mask[id[c]];
          above = above || defect.Q[id[c]] > tau2;
        }
        if (!touches || !above) continue;
        for (const auto& tet : kKuhnTets) {
          Vec3 p[4];
          double f[4];
          for (int v = 0; v < 4; ++v) {
            p[v] = g.position(id[tet[v]]);
            f[v] = defect.Q[id[tet[v]]] - tau2;
          }
          tet_level_set(p, f, [&](const std::array<Vec3, 3>& tri) { reg.boundary_mesh.triangles.push_back(tri); });
        }
      }
  reg.area_g = metric_area(grid.factor, reg.boundary_mesh);
  return reg;
}

RegularRegion build_regular_region(const MetricGrid& grid, const DefectField& defect, double tau, double r0) {
  const std::array<double, 3> tau1 = select_tau1(defect.per_j_gradsq, tau);
  const double tau1_min = *std::min_element(tau1.begin(), tau1.end());
  const Mask inner = e1_inner_mask(grid.spec, defect, tau1, r0);
  const Tau2Selection sel = select_tau2(grid, defect, tau1_min, inner);
  RegularRegion reg = extract_region(grid, defect, sel.tau2, r0);
  reg.tau = tau;
  reg.tau1 = tau1;
  reg.selection = sel;
  return reg;
}

CylinderVolume cylinder_volume(const MetricGrid& grid, const HarmonicTriple& triple, const Mask& mask,
                               const Vec3& direction, double L) {
  const double dn = norm(direction);
  if (!(dn > 0.0)) throw std::invalid_argument("cylinder_volume: zero direction");
  if (!(L > 0.0)) throw std::invalid_argument("cylinder_volume: L must be positive");
  const Vec3 a = (1.0 / dn) * direction;
  const GridSpec& g = grid.spec;
  const double h = g.h(), h3 = h * h * h;
  auto ramp = [h](double slack) { return std::clamp(slack / h + 0.5, 0.0, 1.0); };
  double vol = 0.0;
  bool escapes = false;
  for (std::size_t s = 0; s < g.size(); ++s) {
    const Vec3 U{triple.u[0][s], triple.u[1][s], triple.u[2][s]};
    const double ua = dot(a, U);
    const double rho = std::sqrt(std::max(0.0, dot(U, U) - ua * ua));
    const double w = ramp(L - std::abs(ua)) * ramp(L - rho);
    if (w <= 0.0) continue;
    if (g.depth(s) < 2) escapes = true;
    if (mask[s]) vol += w * grid.sqrt_g[s] * h3;
  }
  if (escapes) throw std::invalid_argument("cylinder_volume: cylinder reaches the boundary collar; reduce L");
  return {vol, vol / (2.0 * std::numbers::pi * L * L * L)};
}

CoverageReport image_coverage(const MetricGrid& grid, const HarmonicTriple& triple, const DefectField& defect,
                              const Mask& mask, const CoverageOptions& opts) {
  const GridSpec& g = grid.spec;
  const double v = opts.voxel > 0.0 ? opts.voxel : g.h();
  if (v > g.h() * (1.0 + 1e-12)) throw std::invalid_argument("image_coverage: voxel pitch coarser than h");
  if (!(opts.D > 0.0)) throw std::invalid_argument("image_coverage: D must be positive");
  const int n = g.n();

  CoverageReport rep;
  const std::size_t base = g.nearest(opts.base_point);
  rep.p_star = {triple.u[0][base], triple.u[1][base], triple.u[2][base]};
  for (int a = 0; a < 3; ++a) {
    double umin = 1e300, umax = -1e300;
    for (std::size_t s = 0; s < g.size(); ++s)
      if (g.depth(s) >= 1) {
        umin = std::min(umin, triple.u[a][s]);
        umax = std::max(umax, triple.u[a][s]);
      }
    if (rep.p_star[a] - opts.D < umin || rep.p_star[a] + opts.D > umax)
      throw std::invalid_argument("image_coverage: B(p*, D) not inside the image of the grid interior");
  }

  Field density(g.size());
  for (std::size_t s = 0; s < g.size(); ++s) {
    const double det = det_sym(defect.gram[0][s], defect.gram[1][s], defect.gram[2][s], defect.gram[3][s],
                               defect.gram[4][s], defect.gram[5][s]);
    density[s] = 1.0 / std::sqrt(std::max(det, 1e-300));
  }

  const int nv = static_cast<int>(std::ceil(2.0 * opts.D / v - 1e-9));
  const Vec3 origin = rep.p_star - Vec3{0.5 * nv * v, 0.5 * nv * v, 0.5 * nv * v};
  auto center = [&](int i, int j, int k) {
    return Vec3{origin[0] + (i + 0.5) * v, origin[1] + (j + 0.5) * v, origin[2] + (k + 0.5) * v};
  };
  const std::size_t NV = static_cast<std::size_t>(nv) * nv * nv;
  std::vector<std::uint8_t> covered(NV, 0);
  std::vector<double> sample(NV, 0.0);

  for (int k = 0; k < n - 1; ++k)
    for (int j = 0; j < n - 1; ++j)
      for (int i = 0; i < n - 1; ++i) {
        std::size_t id[8];
        bool all = true;
        for (int c = 0; c < 8; ++c) {
          id[c] = corner_index(g, i, j, k, c);
          all = all && mask[id[c]];
        }
        if (!all) continue;
        for (const auto& tet : kKuhnTets) {
          Vec3 y[4];
          Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
          for (int q = 0; q < 4; ++q) {
            const std::size_t s = id[tet[q]];
            y[q] = {triple.u[0][s], triple.u[1][s], triple.u[2][s]};
            for (int a = 0; a < 3; ++a) {
              lo[a] = std::min(lo[a], y[q][a]);
              hi[a] = std::max(hi[a], y[q][a]);
            }
          }
          int i0[3], i1[3];
          bool outside = false;
          for (int a = 0; a < 3; ++a) {
            i0[a] = std::max(0, static_cast<int>(std::ceil((lo[a] - origin[a]) / v - 0.5)));
            i1[a] = std::min(nv - 1, static_cast<int>(std::floor((hi[a] - origin[a]) / v - 0.5)));
            outside = outside || i0[a] > i1[a];
          }
          if (outside) continue;
          const Vec3 e1 = y[1] - y[0], e2 = y[2] - y[0], e3 = y[3] - y[0];
          const double det = dot(e1, cross(e2, e3));
          if (std::abs(det) < 1e-300) continue;
          // rows of the inverse of [e1 e2 e3]
          const Vec3 r1 = (1.0 / det) * cross(e2, e3), r2 = (1.0 / det) * cross(e3, e1),
                     r3 = (1.0 / det) * cross(e1, e2);
          for (int kk = i0[2]; kk <= i1[2]; ++kk)
            for (int jj = i0[1]; jj <= i1[1]; ++jj)
              for (int ii = i0[0]; ii <= i1[0]; ++ii) {
                const std::size_t vi = ii + static_cast<std::size_t>(nv) * (jj + static_cast<std::size_t>(nv) * kk);
                if (covered[vi]) continue;
                const Vec3 d = center(ii, jj, kk) - y[0];
                const double l1 = dot(r1, d), l2 = dot(r2, d), l3 = dot(r3, d), l0 = 1.0 - l1 - l2 - l3;
                constexpr double tol = -1e-12;
                if (l0 < tol || l1 < tol || l2 < tol || l3 < tol) continue;
                covered[vi] = 1;
                sample[vi] = l0 * density[id[tet[0]]] + l1 * density[id[tet[1]]] + l2 * density[id[tet[2]]] +
                             l3 * density[id[tet[3]]];
              }
        }
      }

  const double v3 = v * v * v;
  for (int kk = 0; kk < nv; ++kk)
    for (int jj = 0; jj < nv; ++jj)
      for (int ii = 0; ii < nv; ++ii) {
        if (norm(center(ii, jj, kk) - rep.p_star) > opts.D) continue;
        const std::size_t vi = ii + static_cast<std::size_t>(nv) * (jj + static_cast<std::size_t>(nv) * kk);
        rep.ball_volume += v3;
        if (!covered[vi]) {
          rep.uncovered += v3;
          rep.weak_integrand += v3;
        } else {
          const double dev = std::abs(sample[vi] - 1.0);
          rep.weak_integrand += dev * v3;
          rep.max_density_defect = std::max(rep.max_density_defect, dev);
        }
      }
  return rep;
}

InjectivityReport injectivity_probe(const GridSpec& spec, const HarmonicTriple& triple, const Mask& mask,
                                    std::size_t n_pairs, std::uint64_t seed) {
  InjectivityReport rep;
  std::vector<std::size_t> nodes;
  for (std::size_t s = 0; s < mask.size(); ++s)
    if (mask[s]) nodes.push_back(s);
  if (nodes.size() < 2) return rep;
  std::mt19937_64 rng(seed);
  const int n = spec.n();
  const double min_dist = 2.0 * spec.h() * (1.0 - 1e-12);
  double best = 1e300;
  const std::size_t max_draws = 50 * n_pairs + 1000;
  for (std::size_t draw = 0; draw < max_draws && rep.pairs < n_pairs; ++draw) {
    const std::size_t a = nodes[rng() % nodes.size()];
    std::size_t b;
    if (draw % 2 == 0) {
      b = nodes[rng() % nodes.size()];
    } else {
      int ijk[3];
      spec.unravel(a, ijk[0], ijk[1], ijk[2]);
      bool ok = true;
      for (int c = 0; c < 3; ++c) {
        ijk[c] += static_cast<int>(rng() % 9) - 4;
        ok = ok && ijk[c] >= 0 && ijk[c] < n;
      }
      if (!ok) continue;
      b = spec.index(ijk[0], ijk[1], ijk[2]);
      if (!mask[b]) continue;
    }
    const double dx = norm(spec.position(a) - spec.position(b));
    if (dx < min_dist) continue;
    const Vec3 du{triple.u[0][a] - triple.u[0][b], triple.u[1][a] - triple.u[1][b], triple.u[2][a] - triple.u[2][b]};
    best = std::min(best, norm(du) / dx);
    ++rep.pairs;
  }
  rep.min_ratio = rep.pairs ? best : 0.0;
  rep.fold_flag = rep.pairs > 0 && rep.min_ratio < 0.5;
  return rep;
}

}  // namespace pmt
