#include "pmt/pipeline.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "pmt/elliptic.hpp"
#include "pmt/geodesic_diag.hpp"
#include "pmt/mass_analysis.hpp"
#include "pmt/regular_region.hpp"

namespace pmt {

namespace fs = std::filesystem;

namespace {

class StageTimer {
 public:
  StageTimer(std::vector<StageTime>& out, std::string stage)
      : out_(out), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    out_.push_back({stage_, std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()});
  }

 private:
  std::vector<StageTime>& out_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

std::string flag(int v) { return v < 0 ? "nan" : v ? "1" : "0"; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

}  // namespace

MemberResult run_pipeline(const RunConfig& config, const Stages& stages) { return run_member(config, stages, false); }

MemberResult run_member(const RunConfig& cfg, const Stages& stages, bool write_artifacts) {
  MemberResult r;
  r.name = cfg.name;
  std::string stage = "setup";
  fs::path dir;
  try {
    const ConformalFactor factor = cfg.factor();
    r.m_exact = factor.m_exact();
    if (write_artifacts) {
      dir = fs::path(cfg.output_dir) / cfg.name;
      fs::create_directories(dir);
      write_text(dir / "config.txt", serialize_config(cfg));
    }

    stage = "solve";
    std::optional<MetricGrid> grid_store;
    HarmonicTriple triple;
    {
      StageTimer t(r.times, stage);
      grid_store.emplace(build_metric_grid(factor, cfg.grid()));
      triple = solve_harmonic_triple(*grid_store, SolverOptions{cfg.solver_tol, 0});
    }
    const MetricGrid& grid = *grid_store;
    const GridSpec& spec = grid.spec;
    r.solver_iterations = *std::max_element(triple.iterations.begin(), triple.iterations.end());
    r.solver_residual = *std::max_element(triple.residual_norm.begin(), triple.residual_norm.end());
    r.u_dev_max = 0.0;
    for (std::size_t s = 0; s < spec.size(); ++s) {
      const Vec3 x = spec.position(s);
      for (int j = 0; j < 3; ++j) r.u_dev_max = std::max(r.u_dev_max, std::abs(triple.u[j][s] - x[j]));
    }
    if (write_artifacts && cfg.write_fields) {
      write_field((dir / "phi.field").string(), "phi", "1", spec, grid.phi);
      for (int j = 0; j < 3; ++j)
        write_field((dir / ("u" + std::to_string(j + 1) + ".field")).string(), "u" + std::to_string(j + 1), "L",
                    spec, triple.u[j]);
    }

    if (stages.mass && cfg.diag_mass) {
      stage = "mass";
      StageTimer t(r.times, stage);
      MassOptions mo;
      mo.r0 = cfg.r0;
      const MassReport m = analyze_mass(grid, triple, mo);
      r.m_adm = m.m_adm;
      r.bkks = m.bkks_bound;
      r.slack_min = *std::min_element(m.slack.begin(), m.slack.end());
      r.sup_hess = m.sup_hess.sup;
      r.sup_hess_C = m.sup_hess.implied_constant.value_or(NAN);
      r.sup_defect = m.sup_defect.sup;
      r.sup_defect_C = m.sup_defect.implied_constant.value_or(NAN);
      r.decay_exact = m.decay.exact;
      r.decay_exponent = m.decay.exact ? NAN : m.decay.exponent;
    }

    std::optional<RegularRegion> region;
    if (stages.region && cfg.diag_region) {
      stage = "region";
      StageTimer t(r.times, stage);
      const DefectField defect = defect_field(grid, triple);
      r.sup_Q = *std::max_element(defect.Q.begin(), defect.Q.end());
      r.tau = cfg.tau();
      region.emplace(build_regular_region(grid, defect, r.tau, cfg.r0));
      r.tau2 = region->tau2;
      r.seed_ok = region->seed_ok ? 1 : 0;
      r.certificate_ok = region->selection.certificate_ok ? 1 : 0;
      r.certificate_bound = region->selection.certificate_bound;
      r.area_g = region->area_g;

      stage = "cylinder";
      r.cyl_ratio_min = std::numeric_limits<double>::infinity();
      r.cyl_ratio_max = -std::numeric_limits<double>::infinity();
      for (const CylinderSpec& c : cfg.cylinders) {
        const double ratio = cylinder_volume(grid, triple, region->mask, c.direction, c.L).ratio;
        r.cyl_ratio_min = std::min(r.cyl_ratio_min, ratio);
        r.cyl_ratio_max = std::max(r.cyl_ratio_max, ratio);
      }

      stage = "coverage";
      CoverageOptions co;
      co.D = cfg.coverage_D;
      co.voxel = cfg.coverage_voxel;
      co.base_point = cfg.base_point;
      const CoverageReport cov = image_coverage(grid, triple, defect, region->mask, co);
      r.ball_volume = cov.ball_volume;
      r.coverage_defect = cov.uncovered;
      r.weak_integrand = cov.weak_integrand;
      r.density_defect_max = cov.max_density_defect;

      stage = "injectivity";
      const InjectivityReport inj = injectivity_probe(spec, triple, region->mask, cfg.injectivity_pairs, cfg.seed);
      r.injectivity_min = inj.min_ratio;
      r.fold_flag = inj.fold_flag ? 1 : 0;

      if (write_artifacts) {
        if (cfg.write_fields) {
          write_field((dir / "Q.field").string(), "Q", "1", spec, defect.Q);
          write_mask((dir / "region_mask.field").string(), "region_mask", spec, region->mask);
        }
        std::ofstream stl(dir / "boundary.stl");
        write_stl(stl, region->boundary_mesh, cfg.name);
      }
    }

    if (stages.geodesic && cfg.diag_geodesic) {
      stage = "geodesic";
      StageTimer t(r.times, stage);
      if (region) {
        std::vector<DistanceField> fields;
        for (const Vec3& src : cfg.geodesic_sources) fields.push_back(fast_marching(grid, spec.nearest(src)));
        ChartDistanceOptions opts;
        opts.seed = cfg.seed;
        const ChartDistanceReport cd = chart_distance_comparison(spec, triple, region->mask, fields, opts);
        r.chart_pairs = static_cast<double>(cd.pairs);
        if (cd.pairs > 0) {
          r.chart_max_abs = cd.max_abs;
          r.chart_max_norm = cd.max_normalized;
          r.chart_mean_norm = cd.mean_normalized;
        }
        if (write_artifacts && cfg.write_fields)
          write_field((dir / "distance_1.field").string(), "distance_1", "L", spec, fields.front().T);
      }
      stage = "bishop_gromov";
      const DistanceField dist = fast_marching(grid, spec.nearest(cfg.bg_center));
      const BishopGromovReport bg = bishop_gromov_check(grid, dist, cfg.lambda, cfg.bg_radii, 0.01);
      r.bg_lambda = cfg.lambda;
      r.bg_worst_increase = bg.worst_increase;
      r.bg_monotone = bg.monotone ? 1 : 0;
      r.bg_ratios = bg.ratios;
    }
  } catch (const std::exception& e) {
    r.ok = false;
    r.failure = stage + ": " + e.what();
  }

  if (write_artifacts && !dir.empty()) {
    std::ofstream row(dir / "row.csv");
    write_csv(row, rows_table({r}));
    std::ofstream times(dir / "timings.csv");
    CsvTable tt;
    tt.columns = {"stage", "seconds [s]"};
    for (const StageTime& st : r.times) tt.rows.push_back({st.stage, format_number(st.seconds)});
    write_csv(times, tt);
  }
  return r;
}

const std::vector<std::string>& row_columns() {
  static const std::vector<std::string> cols = {
      "name",
      "status",
      "failure",
      "m_exact [L]",
      "m_adm [L]",
      "bkks_1 [L]",
      "bkks_2 [L]",
      "bkks_3 [L]",
      "slack_min [L]",
      "solver_iterations [count]",
      "solver_residual [1]",
      "u_dev_max [L]",
      "sup_hess [1/L]",
      "sup_hess_C [L^(-101/96)]",
      "sup_defect [1]",
      "sup_defect_C [L^(-1/192)]",
      "decay_exponent [1]",
      "tau [1]",
      "tau2 [1]",
      "sup_Q [1]",
      "seed_ok [bool]",
      "certificate_ok [bool]",
      "area_g [L^2]",
      "certificate_bound [L^2]",
      "cyl_ratio_min [1]",
      "cyl_ratio_max [1]",
      "ball_volume [L^3]",
      "coverage_defect [L^3]",
      "weak_integrand [L^3]",
      "density_defect_max [1]",
      "injectivity_min [1]",
      "fold_flag [bool]",
      "chart_pairs [count]",
      "chart_max_abs [L]",
      "chart_max_norm [1]",
      "chart_mean_norm [1]",
      "bg_lambda [1/L^2]",
      "bg_worst_increase [1]",
      "bg_monotone [bool]",
  };
  return cols;
}

std::vector<std::string> to_row(const MemberResult& r) {
  auto n = format_number;
  return {r.name,
          r.ok ? "ok" : "failed",
          r.failure,
          n(r.m_exact),
          n(r.m_adm),
          n(r.bkks[0]),
          n(r.bkks[1]),
          n(r.bkks[2]),
          n(r.slack_min),
          std::to_string(r.solver_iterations),
          n(r.solver_residual),
          n(r.u_dev_max),
          n(r.sup_hess),
          n(r.sup_hess_C),
          n(r.sup_defect),
          n(r.sup_defect_C),
          r.decay_exact ? "exact" : n(r.decay_exponent),
          n(r.tau),
          n(r.tau2),
          n(r.sup_Q),
          flag(r.seed_ok),
          flag(r.certificate_ok),
          n(r.area_g),
          n(r.certificate_bound),
          n(r.cyl_ratio_min),
          n(r.cyl_ratio_max),
          n(r.ball_volume),
          n(r.coverage_defect),
          n(r.weak_integrand),
          n(r.density_defect_max),
          n(r.injectivity_min),
          flag(r.fold_flag),
          n(r.chart_pairs),
          n(r.chart_max_abs),
          n(r.chart_max_norm),
          n(r.chart_mean_norm),
          n(r.bg_lambda),
          n(r.bg_worst_increase),
          flag(r.bg_monotone)};
}

CsvTable rows_table(const std::vector<MemberResult>& results) {
  CsvTable t;
  t.columns = row_columns();
  for (const MemberResult& r : results) t.rows.push_back(to_row(r));
  return t;
}

LogLogFit fit_area_law(const std::vector<double>& m, const std::vector<double>& area) {
  LogLogFit f;
  std::vector<double> x, y;
  bool any_positive = false;
  for (std::size_t i = 0; i < m.size() && i < area.size(); ++i) {
    if (area[i] > 0.0) any_positive = true;
    if (m[i] > 0.0 && area[i] > 0.0) {
      x.push_back(std::log(m[i]));
      y.push_back(std::log(area[i]));
      const double c = area[i] / std::sqrt(m[i]);
      f.c_min = std::isnan(f.c_min) ? c : std::min(f.c_min, c);
      f.c_max = std::isnan(f.c_max) ? c : std::max(f.c_max, c);
    }
  }
  f.points = x.size();
  f.exact_zero = !any_positive && !area.empty();
  if (x.size() < 2) return f;
  const double nx = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nx;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nx;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() >= 3) {
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - (f.intercept + f.slope * x[i]);
      sse += e * e;
    }
    const double dof = nx - 2.0;
    const double se = std::sqrt(sse / dof / sxx);
    const double t = boost::math::quantile(boost::math::students_t_distribution<double>(dof), 0.975);
    f.slope_lo = f.slope - t * se;
    f.slope_hi = f.slope + t * se;
  }
  return f;
}

namespace {

double cell(const CsvTable& t, std::size_t row, const std::string& col) {
  const int c = t.column(col);
  if (c < 0) throw std::runtime_error("results table lacks column `" + col + "`");
  return parse_number(t.rows[row][c]).value_or(NAN);
}

bool strictly_decreasing(const std::vector<double>& v) {
  if (v.size() < 2) return false;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

}  // namespace

SweepSummary summarize(const CsvTable& rows) {
  SweepSummary s;
  s.members = rows.rows.size();
  std::vector<double> m, area, cov, integ, chart;
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    if (rows.rows[i][rows.column("status")] != "ok") continue;
    m.push_back(cell(rows, i, "m_exact [L]"));
    area.push_back(cell(rows, i, "area_g [L^2]"));
    cov.push_back(cell(rows, i, "coverage_defect [L^3]"));
    integ.push_back(cell(rows, i, "weak_integrand [L^3]"));
    chart.push_back(cell(rows, i, "chart_max_norm [1]"));
  }
  s.area_fit.exact_zero = !area.empty() && std::all_of(area.begin(), area.end(), [](double a) { return a == 0.0; });
  if (m.size() < 4) {
    s.skip_reason = "fewer than 4 successful members";
    return s;
  }
  for (std::size_t i = 1; i < m.size(); ++i)
    if (!(m[i] < m[i - 1])) {
      s.skip_reason = "m_exact is not strictly decreasing";
      return s;
    }
  s.fits_run = true;
  s.area_fit = fit_area_law(m, area);
  s.coverage_decreasing = strictly_decreasing(cov);
  s.integrand_decreasing = strictly_decreasing(integ);
  std::vector<double> chart_valid;
  for (double c : chart)
    if (!std::isnan(c)) chart_valid.push_back(c);
  s.chart_decreasing = strictly_decreasing(chart_valid);
  return s;
}

SweepSummary write_report(const std::string& dir_name) {
  const fs::path dir(dir_name);
  if (!fs::is_directory(dir)) throw std::runtime_error(dir_name + " is not a directory");
  std::vector<fs::path> members;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory() && fs::exists(entry.path() / "row.csv")) members.push_back(entry.path());
  if (members.empty()) throw std::runtime_error("no member results (*/row.csv) under " + dir_name);

  CsvTable merged;
  merged.columns = row_columns();
  for (const fs::path& p : members) {
    std::ifstream in(p / "row.csv");
    const CsvTable t = read_csv(in);
    if (t.columns != merged.columns) throw std::runtime_error((p / "row.csv").string() + ": column schema differs");
    for (const auto& row : t.rows) merged.rows.push_back(row);
  }
  const int mcol = merged.column("m_exact [L]");
  std::stable_sort(merged.rows.begin(), merged.rows.end(), [&](const auto& a, const auto& b) {
    const double ma = parse_number(a[mcol]).value_or(NAN), mb = parse_number(b[mcol]).value_or(NAN);
    if (ma != mb) return ma > mb;
    return a[0] < b[0];
  });
  {
    std::ofstream out(dir / "sweep.csv");
    write_csv(out, merged);
  }

  const SweepSummary s = summarize(merged);
  {
    CsvTable fits;
    fits.columns = {"quantity", "value", "unit"};
    auto add = [&](const std::string& q, const std::string& v, const std::string& u) { fits.rows.push_back({q, v, u}); };
    add("members", std::to_string(s.members), "count");
    add("fits_run", s.fits_run ? "1" : "0", "bool");
    add("skip_reason", s.skip_reason, "");
    const LogLogFit& f = s.area_fit;
    add("area_fit", f.exact_zero ? "exact zero" : !s.fits_run ? "skipped" : f.points >= 2 ? "fitted" : "too few nonzero areas", "");
    if (s.fits_run) {
      add("area_fit_points", std::to_string(f.points), "count");
      add("area_slope", format_number(f.slope), "1");
      add("area_slope_lo95", format_number(f.slope_lo), "1");
      add("area_slope_hi95", format_number(f.slope_hi), "1");
      add("area_intercept", format_number(f.intercept), "ln L^2");
      add("area_C_min", format_number(f.c_min), "L^(3/2)");
      add("area_C_max", format_number(f.c_max), "L^(3/2)");
      add("coverage_decreasing", s.coverage_decreasing ? "1" : "0", "bool");
      add("integrand_decreasing", s.integrand_decreasing ? "1" : "0", "bool");
      add("chart_decreasing", s.chart_decreasing ? "1" : "0", "bool");
    }
    std::ofstream out(dir / "fits.csv");
    write_csv(out, fits);
  }

  auto column_series = [&](const std::string& col, const std::string& label) {
    PlotSeries ps;
    ps.label = label;
    for (std::size_t i = 0; i < merged.rows.size(); ++i) {
      if (merged.rows[i][merged.column("status")] != "ok") continue;
      ps.x.push_back(cell(merged, i, "m_exact [L]"));
      ps.y.push_back(cell(merged, i, col));
    }
    return ps;
  };
  {
    Plot p;
    p.title = "Boundary area of the regular region against mass";
    p.x_label = "m_exact [L]";
    p.y_label = "area_g [L^2]";
    p.series.push_back(column_series("area_g [L^2]", "area_g"));
    if (s.fits_run && !std::isnan(s.area_fit.slope)) {
      PlotLine ln;
      ln.slope = s.area_fit.slope;
      ln.intercept = s.area_fit.intercept;
      if (!std::isnan(s.area_fit.slope_lo)) {
        ln.band_lo_slope = s.area_fit.slope_lo;
        ln.band_hi_slope = s.area_fit.slope_hi;
      }
      double sum = 0.0;
      int cnt = 0;
      for (double x : p.series[0].x)
        if (x > 0.0) sum += std::log(x), ++cnt;
      ln.pivot_x = cnt ? std::exp(sum / cnt) : 1.0;
      std::ostringstream lab;
      lab << "least-squares fit, slope " << format_number(s.area_fit.slope);
      ln.label = lab.str();
      p.lines.push_back(ln);
    }
    std::ofstream out(dir / "area_vs_mass.svg");
    write_svg(out, p);
  }
  {
    Plot p;
    p.title = "Mass inequality slack against mass";
    p.x_label = "m_exact [L]";
    p.y_label = "m_adm - max_j bkks_j [L]";
    p.log_y = false;
    PlotSeries ps = column_series("slack_min [L]", "min_j slack");
    p.series.push_back(ps);
    std::ofstream out(dir / "slack_vs_mass.svg");
    write_svg(out, p);
  }
  {
    Plot p;
    p.title = "Weak-volume integrand and uncovered volume against mass";
    p.x_label = "m_exact [L]";
    p.y_label = "volume [L^3]";
    p.series.push_back(column_series("weak_integrand [L^3]", "weak integrand"));
    p.series.push_back(column_series("coverage_defect [L^3]", "uncovered volume"));
    std::ofstream out(dir / "integrand_vs_mass.svg");
    write_svg(out, p);
  }
  return s;
}

}  // namespace pmt
