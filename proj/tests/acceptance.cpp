// Acceptance run over the shipped corpus: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: pmt_acceptance <corpus-dir> [output-dir]
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pmt/elliptic.hpp"
#include "pmt/pipeline.hpp"
#include "pmt/radial_oracle.hpp"

namespace fs = std::filesystem;
using namespace pmt;

namespace {

struct Ladder {
  std::string name;
  std::vector<MemberResult> members;  // decreasing m_exact
  SweepSummary summary;
};

RunConfig load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ParseResult r = parse_config(ss.str());
  if (!r.ok()) throw std::runtime_error(path.string() + ": " + format_error(r.errors.front()));
  return r.config;
}

std::vector<RunConfig> load_list(const fs::path& list) {
  std::ifstream in(list);
  if (!in) throw std::runtime_error("cannot open " + list.string());
  std::vector<RunConfig> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') out.push_back(load(list.parent_path() / line));
  return out;
}

Ladder run_ladder(const std::string& name, const std::vector<RunConfig>& configs, const fs::path& out) {
  Ladder l;
  l.name = name;
  for (RunConfig c : configs) {
    c.output_dir = (out / name).string();
    c.write_fields = false;
    l.members.push_back(run_member(c, Stages{}, true));
    const MemberResult& r = l.members.back();
    double t = 0.0;
    for (const StageTime& s : r.times) t += s.seconds;
    std::printf("  ran %-22s %6.1f s %s\n", r.name.c_str(), t, r.ok ? "" : r.failure.c_str());
    std::fflush(stdout);
  }
  l.summary = write_report((out / name).string());
  return l;
}

struct Line {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// relative L-infinity error of the grid solve against the radial oracle, oracle boundary data
double oracle_error(double h, double L) {
  const double m = 0.2, s = 0.5;
  const MetricGrid grid = build_metric_grid(build_conformal_factor(m, s, {}), GridSpec(h, L));
  const RadialProfile f = radial_ode_oracle(m, s, std::sqrt(3.0) * L + 1.0);
  const auto exact = [&f](const Vec3& x) { return f.value(norm(x)) * x[0]; };
  const Field u = solve_harmonic(assemble_laplace_beltrami(grid), exact, [](const Vec3& x) { return x[0]; });
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ue = exact(grid.spec.position(i));
    err = std::max(err, std::abs(u[i] - ue));
    scale = std::max(scale, std::abs(ue));
  }
  return err / scale;
}

double ratio_max_min(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

bool decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return v.size() >= 2;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <corpus-dir> [output-dir]\n", argv[0]);
    return 2;
  }
  const fs::path corpus = argv[1];
  const fs::path out = argc > 2 ? fs::path(argv[2]) : fs::path("acceptance_out");
  std::vector<Line> lines(11);

  Ladder flat, schw, bumps;
  try {
    std::printf("running corpus from %s\n", corpus.string().c_str());
    flat = run_ladder("flat", load_list(corpus / "flat.list"), out);
    schw = run_ladder("schwarzschild", load_list(corpus / "schwarzschild.list"), out);
    bumps = run_ladder("bumps", load_list(corpus / "bumps.list"), out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance setup failed: %s\n", e.what());
    return 2;
  }
  const MemberResult& f = flat.members.at(0);
  const std::vector<const Ladder*> ladders{&schw, &bumps};
  std::vector<const MemberResult*> everyone{&f};
  for (const Ladder* l : ladders)
    for (const MemberResult& r : l->members) everyone.push_back(&r);
  for (const MemberResult* r : everyone)
    if (!r->ok) {
      for (int c = 1; c <= 10; ++c) lines[c].require(false, r->name + " run: " + r->failure);
    }

  // 1. flat baseline
  {
    Line& L = lines[1];
    L.require(std::abs(f.m_adm) < 1e-8, "|m_adm| = " + fmt("%.2e", f.m_adm));
    L.require(f.u_dev_max < 1e-10, "max|u-x| = " + fmt("%.2e", f.u_dev_max));
    L.require(f.sup_Q < 1e-16, "sup Q = " + fmt("%.2e", f.sup_Q));
    L.require(f.area_g == 0.0, "area = " + fmt("%.3g", f.area_g));
    L.require(std::abs(f.cyl_ratio_min - 1.0) <= 0.02 && std::abs(f.cyl_ratio_max - 1.0) <= 0.02,
              "cylinder ratio " + fmt("%.4f", f.cyl_ratio_min));
    L.require(f.coverage_defect < 1e-6 * f.ball_volume, "coverage defect " + fmt("%.3g", f.coverage_defect));
    L.note("|m_adm| " + fmt("%.1e", std::abs(f.m_adm)) + ", max|u-x| " + fmt("%.1e", f.u_dev_max) + ", sup Q " +
           fmt("%.1e", f.sup_Q) + ", area " + fmt("%g", f.area_g) + ", cylinder " + fmt("%.4f", f.cyl_ratio_min) +
           ", uncovered " + fmt("%g", f.coverage_defect));
  }

  // 2. ADM mass against the exact mass
  {
    Line& L = lines[2];
    for (const MemberResult& r : schw.members)
      if (r.m_exact == 0.2) {
        const double rel = std::abs(r.m_adm - 0.2) / 0.2;
        L.require(rel <= 0.02, r.name);
        L.note("Schwarzschild 0.2: " + fmt("%.2e", rel) + " rel");
      }
    double worst = 0.0;
    for (const MemberResult& r : bumps.members) {
      const double rel = std::abs(r.m_adm - r.m_exact) / r.m_exact;
      worst = std::max(worst, rel);
      L.require(rel <= 0.02, r.name);
    }
    L.note("bump members worst " + fmt("%.2e", worst) + " rel");
  }

  // 3. solver oracle
  {
    Line& L = lines[3];
    try {
      const double e_ref = oracle_error(0.25, RunConfig{}.L_box);
      const double e1 = oracle_error(0.5, 4.0), e2 = oracle_error(0.25, 4.0), e3 = oracle_error(0.125, 4.0);
      const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
      L.require(e_ref <= 5e-3, "error at h = 0.25");
      L.require(p1 >= 1.9 && p2 >= 1.9, "order");
      L.note("rel error " + fmt("%.2e", e_ref) + " at h = 0.25, L_box = 12; orders " + fmt("%.2f", p1) + ", " +
             fmt("%.2f", p2) + " on L_box = 4");
    } catch (const std::exception& e) {
      L.require(false, e.what());
    }
  }

  // 4. mass inequality
  {
    Line& L = lines[4];
    double worst = 1e300;
    for (const MemberResult* r : everyone) {
      for (int j = 0; j < 3; ++j) {
        const double slack = r->m_adm - r->bkks[j];
        if (r->m_exact > 0.0) worst = std::min(worst, slack);
        L.require(slack >= -1e-4, r->name + " j=" + std::to_string(j + 1));
        if (r->m_exact > 0.0) L.require(r->bkks[j] > 0.0, r->name + " bound not positive");
      }
    }
    L.note("min slack " + fmt("%.2e", worst) + " over curved members, flat slack " +
           fmt("%.1e", f.m_adm - *std::max_element(f.bkks.begin(), f.bkks.end())));
  }

  // 5. co-area certificate
  {
    Line& L = lines[5];
    for (const MemberResult* r : everyone) L.require(r->certificate_ok == 1, r->name);
    L.note("certificate holds for " + std::to_string(everyone.size()) + " members");
  }

  // 6. area law over the bump ladder
  {
    Line& L = lines[6];
    const LogLogFit& fit = bumps.summary.area_fit;
    L.require(bumps.summary.fits_run && fit.points >= 2, "fit not available");
    L.require(fit.slope >= 0.4, "slope below 0.4");
    L.require(fit.c_max / fit.c_min <= 10.0, "C max/min above 10");
    L.note("slope " + fmt("%.3f", fit.slope) + " [" + fmt("%.2f", fit.slope_lo) + ", " + fmt("%.2f", fit.slope_hi) +
           "] over " + std::to_string(fit.points) + " nonzero areas; C max/min " + fmt("%.1f", fit.c_max / fit.c_min));
  }

  // 7. weak volume trend
  {
    Line& L = lines[7];
    const double band = 4.0 * RunConfig{}.tau0 + 0.05;
    for (const Ladder* l : ladders) {
      L.require(l->summary.coverage_decreasing, l->name + " coverage not strictly decreasing");
      L.require(l->summary.integrand_decreasing, l->name + " integrand not strictly decreasing");
      const MemberResult& last = l->members.back();
      const double frac = last.weak_integrand / last.ball_volume;
      L.require(frac <= 0.05, l->name + " smallest integrand " + fmt("%.3f", frac));
      L.require(last.seed_ok == 1, l->name + " smallest member flagged");
      int checked = 0;
      for (const MemberResult& r : l->members) {
        if (r.seed_ok != 1) continue;  // flagged members carry no region guarantee
        ++checked;
        L.require(std::abs(r.cyl_ratio_min - 1.0) <= band && std::abs(r.cyl_ratio_max - 1.0) <= band,
                  r.name + " cylinder " + fmt("%.3f", r.cyl_ratio_min));
      }
      L.note(l->name + ": smallest integrand " + fmt("%.2f", 100.0 * frac) + "% of the ball, cylinders checked on " +
             std::to_string(checked) + " unflagged members");
    }
  }

  // 8. chart distance
  {
    Line& L = lines[8];
    const double h = RunConfig{}.h;
    const double c_fm = f.chart_pairs > 0 ? f.chart_max_norm / h : NAN;
    L.require(!std::isnan(c_fm), "flat calibration has no pairs");
    const double bound = 4.0 * RunConfig{}.tau0 + c_fm * h;
    for (const Ladder* l : ladders) {
      std::vector<double> d;
      for (const MemberResult& r : l->members) {
        if (!(r.chart_pairs > 0)) continue;
        d.push_back(r.chart_max_norm);
        L.require(r.chart_max_norm <= bound, r.name + " discrepancy " + fmt("%.3f", r.chart_max_norm));
      }
      L.require(decreasing(d), l->name + " not decreasing");
      L.note(l->name + ": " + std::to_string(d.size()) + " members with pairs, max " +
             fmt("%.3f", d.empty() ? NAN : *std::max_element(d.begin(), d.end())));
    }
    L.note("bound 4 tau0 + C_fm h = " + fmt("%.3f", bound) + " with C_fm = " + fmt("%.2e", c_fm));
  }

  // 9. Bishop-Gromov
  {
    Line& L = lines[9];
    double worst = 0.0;
    for (const MemberResult* r : everyone) {
      L.require(r->bg_monotone == 1, r->name);
      worst = std::max(worst, r->bg_worst_increase);
    }
    double flat_dev = 0.0;
    for (double q : f.bg_ratios) flat_dev = std::max(flat_dev, std::abs(q - 1.0));
    L.require(f.bg_lambda == 0.0 && flat_dev <= 0.02, "flat ratio deviation " + fmt("%.4f", flat_dev));
    L.note("worst increase " + fmt("%.2e", worst) + "; flat |ratio - 1| <= " + fmt("%.4f", flat_dev));
  }

  // 10. far-region diagnostics
  {
    Line& L = lines[10];
    for (const Ladder* l : ladders) {
      std::vector<double> sh, sd, ch, cd;
      double worst_exp = -1e300;
      for (const MemberResult& r : l->members) {
        sh.push_back(r.sup_hess);
        sd.push_back(r.sup_defect);
        ch.push_back(r.sup_hess_C);
        cd.push_back(r.sup_defect_C);
        worst_exp = std::max(worst_exp, r.decay_exponent);
      }
      L.require(decreasing(sh), l->name + " sup-Hessian not decreasing");
      L.require(decreasing(sd), l->name + " sup-defect not decreasing");
      L.require(ratio_max_min(ch) <= 10.0, l->name + " sup-Hessian C max/min above 10");
      L.require(ratio_max_min(cd) <= 10.0, l->name + " sup-defect C max/min above 10");
      L.require(worst_exp <= -0.8, l->name + " decay exponent " + fmt("%.2f", worst_exp));
      L.note(l->name + ": C ratios " + fmt("%.1f", ratio_max_min(ch)) + " / " + fmt("%.1f", ratio_max_min(cd)) +
             ", decay exponent <= " + fmt("%.2f", worst_exp));
    }
  }

  static const char* names[] = {"",
                                "flat baseline",
                                "ADM oracle",
                                "solver oracle",
                                "mass inequality",
                                "co-area certificate",
                                "area law trend",
                                "weak-volume trend",
                                "chart distance",
                                "Bishop-Gromov",
                                "far-region diagnostics"};
  int failed = 0;
  std::printf("\n");
  for (int c = 1; c <= 10; ++c) {
    std::printf("criterion %2d %s %s: %s\n", c, lines[c].pass ? "PASS" : "FAIL", names[c], lines[c].detail.c_str());
    failed += lines[c].pass ? 0 : 1;
  }
  std::printf("%d of 10 criteria pass\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
