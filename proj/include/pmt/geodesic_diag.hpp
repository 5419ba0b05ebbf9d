#pragma once

#include <cstdint>
#include <vector>

#include "pmt/elliptic.hpp"

namespace pmt {

/// First-arrival solution of |grad T| = phi^2 (the conformal length element) from one node.
struct DistanceField {
  std::size_t source = 0;
  Field T;
};

struct FastMarchingOptions {
  /// Nodes within this many cells of the source are initialised with the conformal length
  /// of the straight segment (Gauss-Legendre), which removes most of the point-source error.
  double init_radius_cells = 2.0;
};

/// First-order, 6-neighbour upwind fast marching. Throws unless the source is interior.
DistanceField fast_marching(const MetricGrid& grid, std::size_t source, const FastMarchingOptions& opts = {});

/// Integral of phi^2 along the straight segment [a, b] (16-point Gauss-Legendre per unit of length).
double segment_conformal_length(const ConformalFactor& factor, const Vec3& a, const Vec3& b);

struct ChartDistanceReport {
  std::size_t pairs = 0;
  double max_abs = 0.0;
  double max_normalized = 0.0;  // max ||U(y) - U(z)| - d(y,z)| / d(y,z)
  double mean_normalized = 0.0;
  std::vector<double> normalized;  // all samples, source-major
};

struct ChartDistanceOptions {
  double delta = 0.0;         // minimum distance to the mask complement; 0 means 2h
  double min_separation = 1.0;  // ignore pairs closer than this (coordinate length)
  std::size_t pairs_per_source = 2000;
  std::uint64_t seed = 1;
};

/// Compares chart distance |U(y) - U(z)| with the metric distance d(y, z) for y the source of each
/// field and z sampled from mask nodes at lattice distance >= delta from outside the mask.
/// Sources that are not deep in the mask are skipped; no valid pairs gives pairs == 0.
ChartDistanceReport chart_distance_comparison(const GridSpec& spec, const HarmonicTriple& triple, const Mask& mask,
                                              const std::vector<DistanceField>& fields,
                                              const ChartDistanceOptions& opts = {});

/// Lattice (6-connected) distance in cells from each node to the nearest node outside the mask.
std::vector<int> mask_depth(const GridSpec& spec, const Mask& mask);

/// |B_{-Lambda}(r)| = 4 pi int_0^r (sinh(sqrt(Lambda) t) / sqrt(Lambda))^2 dt.
double model_ball_volume(double Lambda, double r);

struct BishopGromovReport {
  std::vector<double> radii;
  std::vector<double> volumes;
  std::vector<double> ratios;
  /// max over consecutive radii of ratio[i+1] / ratio[i] - 1
  double worst_increase = 0.0;
  bool monotone = false;  // worst_increase <= slack
};

/// Geodesic-ball volumes sum phi^6 h^3 w with w = clamp((r - T) / (phi^2 h) + 1/2, 0, 1).
/// Throws std::invalid_argument if radii are not increasing or a ball reaches the box boundary.
BishopGromovReport bishop_gromov_check(const MetricGrid& grid, const DistanceField& dist, double Lambda,
                                       const std::vector<double>& radii, double slack = 0.01);

}  // namespace pmt
