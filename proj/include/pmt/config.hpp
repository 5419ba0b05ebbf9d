#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmt/grid.hpp"
#include "pmt/metric_family.hpp"

namespace pmt {

enum class TauMode { Fixed, Power };

struct CylinderSpec {
  Vec3 direction{1.0, 0.0, 0.0};
  double L = 4.0;
  bool operator==(const CylinderSpec&) const = default;
};

/// One corpus member and everything the pipeline needs to run it. Text form: docs/formats.md.
struct RunConfig {
  std::string name = "member";
  double m_core = 0.0;
  double s_reg = 0.5;
  std::vector<Bump> bumps;
  double h = 0.25;
  double L_box = 12.0;
  double r0 = 4.0;
  TauMode tau_mode = TauMode::Fixed;
  double tau0 = 0.05;
  double epsilon = 1.0 / 200.0;
  std::vector<CylinderSpec> cylinders{{{1.0, 0.0, 0.0}, 4.0}, {{0.0, 1.0, 0.0}, 4.0}, {{0.0, 0.0, 1.0}, 4.0}};
  double coverage_D = 6.0;
  double coverage_voxel = 0.0;  // 0: grid spacing
  Vec3 base_point{5.0, 0.0, 0.0};
  std::size_t injectivity_pairs = 10000;
  std::vector<Vec3> geodesic_sources{{5.0, 0.0, 0.0}, {0.0, -5.0, 0.0}};
  double lambda = 0.0;  // Ricci lower bound Ric >= -2 Lambda g, shipped per member
  Vec3 bg_center{0.0, 0.0, 0.0};
  std::vector<double> bg_radii{1.0, 2.0, 3.0, 4.0, 5.0};
  double solver_tol = 1e-10;
  bool diag_mass = true;
  bool diag_region = true;
  bool diag_geodesic = true;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  bool write_fields = true;  // node fields are ~7 MB each at the reference grid

  ConformalFactor factor() const { return build_conformal_factor(m_core, s_reg, bumps); }
  GridSpec grid() const { return GridSpec(h, L_box); }
  /// tau0 in fixed mode, m_exact^epsilon in power mode.
  double tau() const;

  bool operator==(const RunConfig&) const = default;
};

struct ConfigError {
  int line = 0;  // 0: not tied to one line
  std::string key;
  std::string reason;
};

struct ParseResult {
  RunConfig config;
  std::vector<ConfigError> errors;
  bool ok() const { return errors.empty(); }
};

/// Parses `key = value` lines. Every error is collected; defaults fill absent keys.
ParseResult parse_config(const std::string& text);

/// Range checks on an assembled config (parse_config runs these too).
std::vector<ConfigError> validate_config(const RunConfig& config);

/// Canonical text form; parse_config(serialize_config(c)).config == c for valid c.
std::string serialize_config(const RunConfig& config);

std::string format_error(const ConfigError& e);

}  // namespace pmt
