// Writes the standard corpus configs and sweep lists. The Ricci lower bound Lambda of each
// member is computed here, offline, and shipped as a config constant.
#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "pmt/config.hpp"
#include "pmt/io.hpp"

namespace fs = std::filesystem;
using namespace pmt;

namespace {

constexpr double kLadder[] = {0.4, 0.2, 0.1, 0.05, 0.025};
constexpr double kSafety = 1.1;

// Three bumps off the axes carrying 30%, 25% and 15% of the total mass; the core carries 30%.
struct BumpShape {
  Vec3 center;
  double width;
  double share;
};
constexpr BumpShape kBumps[] = {
    {{1.5, 0.0, 0.0}, 0.4, 0.30},
    {{-0.75, 1.3, 0.0}, 0.5, 0.25},
    {{0.0, -0.9, 1.2}, 0.6, 0.15},
};
constexpr double kCoreShare = 0.30;

// Max of ricci_lambda_at over a lattice of pitch `pitch` covering the box, refined by a second
// pass at pitch/4 around the best sample.
double sampled_lambda(const ConformalFactor& f, double L, double pitch) {
  double best = 0.0;
  Vec3 at{0, 0, 0};
  const int n = static_cast<int>(std::round(2.0 * L / pitch));
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        const Vec3 x{-L + i * pitch, -L + j * pitch, -L + k * pitch};
        const double v = ricci_lambda_at(f, x);
        if (v > best) best = v, at = x;
      }
  const double fine = pitch / 4.0;
  for (int k = -8; k <= 8; ++k)
    for (int j = -8; j <= 8; ++j)
      for (int i = -8; i <= 8; ++i) best = std::max(best, ricci_lambda_at(f, at + Vec3{i * fine, j * fine, k * fine}));
  return best;
}

// kSafety times the sampled max, rounded up to three significant digits.
double shipped_lambda(double sampled) {
  if (sampled <= 0.0) return 0.0;
  const double v = kSafety * sampled;
  const double scale = std::pow(10.0, std::floor(std::log10(v)) - 2.0);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", std::ceil(v / scale) * scale);
  return std::strtod(buf, nullptr);
}

void write_member(const fs::path& path, const std::string& name, const ConformalFactor& f, double m_core,
                  const std::vector<Bump>& bumps, double lambda, double sampled, const std::string& out_dir) {
  std::ofstream out(path);
  out << "# generated by pmt_make_corpus\n";
  out << "# m_exact = " << format_number(f.m_exact()) << "\n";
  out << "# geodesic.lambda = " << kSafety << " x sampled max " << format_number(sampled)
      << " of the closed-form Ricci bound, rounded up\n";
  out << "name = " << name << "\n";
  out << "m_core = " << format_number(m_core) << "\n";
  out << "s_reg = 0.5\n";
  for (std::size_t k = 0; k < bumps.size(); ++k) {
    const Bump& b = bumps[k];
    out << "bump." << k + 1 << ".center = " << format_number(b.center[0]) << ", " << format_number(b.center[1])
        << ", " << format_number(b.center[2]) << "\n";
    out << "bump." << k + 1 << ".amplitude = " << format_number(b.amplitude) << "\n";
    out << "bump." << k + 1 << ".width = " << format_number(b.width) << "\n";
  }
  out << "geodesic.lambda = " << format_number(lambda) << "\n";
  out << "output.dir = " << out_dir << "\n";
}

std::string tag(double m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", m);
  std::string s = buf;
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Write the standard corpus configs"};
  std::string dir = "corpus";
  double pitch = 0.125;
  app.add_option("--dir", dir, "output directory");
  app.add_option("--pitch", pitch, "sampling pitch for the Ricci bound");
  CLI11_PARSE(app, argc, argv);

  const double L = RunConfig{}.L_box;
  fs::create_directories(dir);
  {
    write_member(fs::path(dir) / "flat.cfg", "flat", ConformalFactor{}, 0.0, {}, 0.0, 0.0, "results/flat");
    std::ofstream(fs::path(dir) / "flat.list") << "flat.cfg\n";
  }
  std::ofstream schw(fs::path(dir) / "schwarzschild.list"), bumps(fs::path(dir) / "bumps.list");
  for (double m : kLadder) {
    const std::string sname = "schwarzschild_m" + tag(m);
    const ConformalFactor fs_ = build_conformal_factor(m, 0.5, {});
    const double ls = sampled_lambda(fs_, L, pitch);
    write_member(fs::path(dir) / (sname + ".cfg"), sname, fs_, m, {}, shipped_lambda(ls), ls, "results/schwarzschild");
    schw << sname << ".cfg\n";

    std::vector<Bump> bs;
    for (const BumpShape& b : kBumps) {
      // m_exact = m_core + 2 sum_k a_k pi^{3/2} w_k^3
      const double a = b.share * m / (2.0 * std::pow(std::numbers::pi, 1.5) * b.width * b.width * b.width);
      bs.push_back({b.center, a, b.width});
    }
    const std::string bname = "bumps_m" + tag(m);
    const ConformalFactor fb = build_conformal_factor(kCoreShare * m, 0.5, bs);
    const double lb = sampled_lambda(fb, L, pitch);
    write_member(fs::path(dir) / (bname + ".cfg"), bname, fb, kCoreShare * m, bs, shipped_lambda(lb), lb,
                 "results/bumps");
    bumps << bname << ".cfg\n";
    std::printf("%-24s Lambda %.4g   %-18s Lambda %.4g\n", sname.c_str(), shipped_lambda(ls), bname.c_str(),
                shipped_lambda(lb));
  }
  return 0;
}
