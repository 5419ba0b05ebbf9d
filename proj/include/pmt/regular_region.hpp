#pragma once

// Orthonormality defect of the harmonic chart, co-area threshold selection, the regular
// subregion E, and the volume / coverage measurements made on it.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pmt/elliptic.hpp"

namespace pmt {

struct DefectField {
  Field Q;                            // sum_jk (<grad u^j, grad u^k>_g - delta_jk)^2
  Field gradQ_norm;                   // |grad Q|_g = phi^-2 |dQ|
  std::array<Field, 3> per_j_gradsq;  // |grad u^j|_g^2
  /// <grad u^j, grad u^k>_g in (11, 22, 33, 12, 13, 23) order.
  std::array<Field, 6> gram;
};

DefectField defect_field(const MetricGrid& grid, const HarmonicTriple& triple);

struct TriangleMesh {
  std::vector<std::array<Vec3, 3>> triangles;
  bool empty() const { return triangles.empty(); }
};

double euclidean_area(const std::array<Vec3, 3>& tri);
/// sum over triangles of phi^4(centroid) times Euclidean area.
double metric_area(const ConformalFactor& factor, const TriangleMesh& mesh);

void write_stl(std::ostream& out, const TriangleMesh& mesh, const std::string& name = "boundary");

/// Per coordinate, tau1 in (tau/2, tau): midpoint of the widest gap between values of
/// |grad u^j|^2 - 1 falling in that interval. Throws unless 0 < tau < 1/4.
std::array<double, 3> select_tau1(const std::array<Field, 3>& per_j_gradsq, double tau);

/// E1 cap intersect M_r0: nodes with |x| <= r0 and |grad u^j|^2 <= 1 + tau1[j] for all j.
Mask e1_inner_mask(const GridSpec& spec, const DefectField& defect, const std::array<double, 3>& tau1, double r0);

constexpr int kTau2Candidates = 64;

struct Tau2Selection {
  double tau2 = 0.0;
  double tau1_min = 0.0;
  std::array<double, kTau2Candidates> levels{};
  std::array<double, kTau2Candidates> areas{};
  double chosen_area = 0.0;
  /// (2 / tau1_min) sum over region nodes of |grad Q|_g phi^6 h^3.
  double certificate_bound = 0.0;
  bool certificate_ok = true;
  bool region_empty = false;
};

/// Scans 64 levels in (tau1_min/2, tau1_min); areas are those of the piecewise-linear
/// level set of Q restricted to tetrahedra whose corners all lie in region.
Tau2Selection select_tau2(const MetricGrid& grid, const DefectField& defect, double tau1_min, const Mask& region);

struct RegularRegion {
  double tau = 0.0;
  std::array<double, 3> tau1{};
  double tau2 = 0.0;
  Mask mask;
  TriangleMesh boundary_mesh;
  double area_g = 0.0;
  bool seed_ok = false;
  Tau2Selection selection;
};

/// 6-connected component(s) of {Q <= tau2} among interior nodes, grown from the nodes with
/// |x| > r0, and the level set Q = tau2 in every cell touching the mask.
RegularRegion extract_region(const MetricGrid& grid, const DefectField& defect, double tau2, double r0);

/// select_tau1, select_tau2 and extract_region in sequence.
RegularRegion build_regular_region(const MetricGrid& grid, const DefectField& defect, double tau, double r0);

struct CylinderVolume {
  double volume = 0.0;
  double ratio = 0.0;  // volume / (2 pi L^3)
};

/// Volume of {|u^a| <= L, |U|^2 - (u^a)^2 <= L^2} within the mask, u^a = a . U. The two
/// constraints are applied with a linear half-cell ramp so planes through nodes count half.
/// Throws std::invalid_argument if the cylinder reaches the two-cell boundary collar.
CylinderVolume cylinder_volume(const MetricGrid& grid, const HarmonicTriple& triple, const Mask& mask,
                               const Vec3& direction, double L);

struct CoverageOptions {
  double D = 6.0;
  double voxel = 0.0;  // 0: grid spacing
  Vec3 base_point{5.0, 0.0, 0.0};
};

struct CoverageReport {
  Vec3 p_star{};
  double ball_volume = 0.0;  // voxel count in the ball times voxel^3
  double uncovered = 0.0;
  double weak_integrand = 0.0;
  /// max over covered voxels of |sqrt det g - 1|
  double max_density_defect = 0.0;
};

/// Rasterizes U(mask cells) into voxels of B(p*, D), p* = U(node nearest base_point).
/// A covered voxel carries sqrt det g = det(<grad u^j, grad u^k>)^{-1/2}, interpolated from
/// the preimage tetrahedron; uncovered voxels contribute 1 to the weak integrand.
CoverageReport image_coverage(const MetricGrid& grid, const HarmonicTriple& triple, const DefectField& defect,
                              const Mask& mask, const CoverageOptions& opts = {});

struct InjectivityReport {
  double min_ratio = 0.0;
  std::size_t pairs = 0;
  bool fold_flag = false;
};

/// min |U(y) - U(z)| / |y - z| over random mask node pairs at least 2h apart. Half of the
/// pairs are global, half are local (offsets up to 4 cells) to catch small folds.
InjectivityReport injectivity_probe(const GridSpec& spec, const HarmonicTriple& triple, const Mask& mask,
                                    std::size_t n_pairs, std::uint64_t seed);

/// The six tetrahedra of the Kuhn split of a unit cube, as corner indices bit0 = x, bit1 = y, bit2 = z.
extern const int kKuhnTets[6][4];

}  // namespace pmt
