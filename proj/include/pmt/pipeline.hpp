#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pmt/config.hpp"
#include "pmt/io.hpp"

namespace pmt {

/// Which stages a run executes. The diag.* toggles of the config switch stages off further.
struct Stages {
  bool mass = true;
  bool region = true;
  bool geodesic = true;
};

struct StageTime {
  std::string stage;
  double seconds = 0.0;
};

/// Everything one member run measures. NaN marks a quantity that was not computed.
struct MemberResult {
  std::string name;
  bool ok = true;
  std::string failure;  // "<stage>: <reason>" when !ok

  double m_exact = 0.0;
  int solver_iterations = 0;
  double solver_residual = 0.0;
  double u_dev_max = 0.0;  // max |u^j - x^j| over nodes

  double m_adm = NAN;
  std::array<double, 3> bkks{NAN, NAN, NAN};
  double slack_min = NAN;
  double sup_hess = NAN, sup_hess_C = NAN;
  double sup_defect = NAN, sup_defect_C = NAN;
  double decay_exponent = NAN;
  bool decay_exact = false;

  double tau = NAN, tau2 = NAN;
  double sup_Q = NAN;
  int seed_ok = -1;  // -1 not computed
  int certificate_ok = -1;
  double area_g = NAN, certificate_bound = NAN;
  double cyl_ratio_min = NAN, cyl_ratio_max = NAN;
  double ball_volume = NAN, coverage_defect = NAN, weak_integrand = NAN, density_defect_max = NAN;
  double injectivity_min = NAN;
  int fold_flag = -1;

  double chart_pairs = NAN;
  double chart_max_abs = NAN, chart_max_norm = NAN, chart_mean_norm = NAN;
  double bg_lambda = NAN, bg_worst_increase = NAN;
  int bg_monotone = -1;
  std::vector<double> bg_ratios;

  std::vector<StageTime> times;
};

/// Runs one member. Module errors do not throw: they end the run with ok = false and the stage
/// recorded in failure. The config must already be valid.
MemberResult run_pipeline(const RunConfig& config, const Stages& stages = {});

/// Writes config.txt, row.csv, timings.csv, the node fields and the boundary STL under
/// <output_dir>/<name>/. Field artifacts require the run to have kept its data, so this is done
/// inside run_member.
MemberResult run_member(const RunConfig& config, const Stages& stages, bool write_artifacts);

/// Row schema shared by every results CSV; see docs/formats.md.
const std::vector<std::string>& row_columns();
std::vector<std::string> to_row(const MemberResult& r);
CsvTable rows_table(const std::vector<MemberResult>& results);

struct LogLogFit {
  std::size_t points = 0;  // members entering the fit
  bool exact_zero = false;  // every area is zero
  double slope = NAN, intercept = NAN;
  double slope_lo = NAN, slope_hi = NAN;  // 95% confidence band on the slope
  double c_min = NAN, c_max = NAN;        // implied constants area / m^{1/2} over fitted members
};

/// Ordinary least squares of log area against log m over members with m > 0 and area > 0.
LogLogFit fit_area_law(const std::vector<double>& m, const std::vector<double>& area);

struct SweepSummary {
  std::size_t members = 0;
  bool fits_run = false;  // needs at least 4 members with strictly decreasing m_exact
  std::string skip_reason;
  LogLogFit area_fit;
  bool coverage_decreasing = false;
  bool integrand_decreasing = false;
  bool chart_decreasing = false;
};

/// Trend fits over rows ordered by decreasing m_exact. Failed rows are excluded from the fits.
SweepSummary summarize(const CsvTable& rows);

/// Reads <dir>/*/row.csv, merges them ordered by decreasing m_exact into <dir>/sweep.csv, writes
/// <dir>/fits.csv and the three SVG plots. Returns the summary.
SweepSummary write_report(const std::string& dir);

}  // namespace pmt
