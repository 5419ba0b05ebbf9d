#include "pmt/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

namespace pmt {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_uint(const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

std::optional<std::vector<double>> to_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& part : split(s, ',')) {
    auto v = to_double(part);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::optional<Vec3> to_vec3(const std::string& s) {
  auto v = to_list(s);
  if (!v || v->size() != 3) return std::nullopt;
  return Vec3{(*v)[0], (*v)[1], (*v)[2]};
}

std::optional<bool> to_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  return std::nullopt;
}

std::string num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string vec(const Vec3& v) { return num(v[0]) + ", " + num(v[1]) + ", " + num(v[2]); }

struct PartialBump {
  std::optional<Vec3> center;
  std::optional<double> amplitude, width;
  int line = 0;
};

struct PartialCylinder {
  std::optional<Vec3> direction;
  std::optional<double> L;
  int line = 0;
};

}  // namespace

double RunConfig::tau() const {
  if (tau_mode == TauMode::Fixed) return tau0;
  return std::pow(factor().m_exact(), epsilon);
}

ParseResult parse_config(const std::string& text) {
  ParseResult res;
  RunConfig& c = res.config;
  std::map<int, PartialBump> bumps;
  std::map<int, PartialCylinder> cylinders;
  std::map<int, Vec3> sources;
  std::map<std::string, int> key_line;
  auto error = [&](int line, const std::string& key, const std::string& reason) {
    res.errors.push_back({line, key, reason});
  };

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      error(line_no, "", "expected `key = value`");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      error(line_no, "", "empty key");
      continue;
    }
    if (auto [it, fresh] = key_line.emplace(key, line_no); !fresh) {
      error(line_no, key, "duplicate key (first set on line " + std::to_string(it->second) + ")");
      continue;
    }
    auto bad = [&](const std::string& what) { error(line_no, key, "malformed value `" + value + "`: expected " + what); };
    auto set_num = [&](double& dst) {
      if (auto v = to_double(value)) dst = *v;
      else bad("a number");
    };
    auto set_vec = [&](Vec3& dst) {
      if (auto v = to_vec3(value)) dst = *v;
      else bad("three comma-separated numbers");
    };
    auto set_bool = [&](bool& dst) {
      if (auto v = to_bool(value)) dst = *v;
      else bad("true or false");
    };

    const std::vector<std::string> parts = split(key, '.');
    // indexed groups: bump.K.field, cylinder.K.field, geodesic.source.K
    auto index_of = [&](const std::string& s) -> std::optional<int> {
      auto v = to_uint(s);
      if (!v || *v < 1 || *v > 1000) return std::nullopt;
      return static_cast<int>(*v);
    };
    if (parts.size() == 3 && parts[0] == "bump") {
      auto k = index_of(parts[1]);
      if (!k) {
        error(line_no, key, "bump index must be an integer in [1, 1000]");
        continue;
      }
      PartialBump& b = bumps[*k];
      b.line = b.line ? b.line : line_no;
      if (parts[2] == "center") {
        if (auto v = to_vec3(value)) b.center = *v;
        else bad("three comma-separated numbers");
      } else if (parts[2] == "amplitude" || parts[2] == "width") {
        if (auto v = to_double(value)) (parts[2] == "amplitude" ? b.amplitude : b.width) = *v;
        else bad("a number");
      } else {
        error(line_no, key, "unknown key");
      }
      continue;
    }
    if (parts.size() == 3 && parts[0] == "cylinder") {
      auto k = index_of(parts[1]);
      if (!k) {
        error(line_no, key, "cylinder index must be an integer in [1, 1000]");
        continue;
      }
      PartialCylinder& cy = cylinders[*k];
      cy.line = cy.line ? cy.line : line_no;
      if (parts[2] == "direction") {
        if (auto v = to_vec3(value)) cy.direction = *v;
        else bad("three comma-separated numbers");
      } else if (parts[2] == "L") {
        if (auto v = to_double(value)) cy.L = *v;
        else bad("a number");
      } else {
        error(line_no, key, "unknown key");
      }
      continue;
    }
    if (parts.size() == 3 && parts[0] == "geodesic" && parts[1] == "source") {
      auto k = index_of(parts[2]);
      if (!k) {
        error(line_no, key, "source index must be an integer in [1, 1000]");
        continue;
      }
      if (auto v = to_vec3(value)) sources[*k] = *v;
      else bad("three comma-separated numbers");
      continue;
    }

    if (key == "name") {
      if (value.empty() || value.find_first_of(" \t/\\,") != std::string::npos)
        bad("a non-empty name without spaces, commas or slashes");
      else
        c.name = value;
    } else if (key == "m_core") set_num(c.m_core);
    else if (key == "s_reg") set_num(c.s_reg);
    else if (key == "grid.h") set_num(c.h);
    else if (key == "grid.L_box") set_num(c.L_box);
    else if (key == "region.r0") set_num(c.r0);
    else if (key == "tau.mode") {
      if (value == "fixed") c.tau_mode = TauMode::Fixed;
      else if (value == "power") c.tau_mode = TauMode::Power;
      else bad("fixed or power");
    } else if (key == "tau.tau0") set_num(c.tau0);
    else if (key == "tau.epsilon") set_num(c.epsilon);
    else if (key == "coverage.D") set_num(c.coverage_D);
    else if (key == "coverage.voxel") set_num(c.coverage_voxel);
    else if (key == "coverage.base_point") set_vec(c.base_point);
    else if (key == "injectivity.pairs") {
      if (auto v = to_uint(value)) c.injectivity_pairs = static_cast<std::size_t>(*v);
      else bad("a non-negative integer");
    } else if (key == "geodesic.lambda") set_num(c.lambda);
    else if (key == "geodesic.bg_center") set_vec(c.bg_center);
    else if (key == "geodesic.bg_radii") {
      if (auto v = to_list(value)) c.bg_radii = *v;
      else bad("comma-separated numbers");
    } else if (key == "solver.tol") set_num(c.solver_tol);
    else if (key == "diag.mass") set_bool(c.diag_mass);
    else if (key == "diag.region") set_bool(c.diag_region);
    else if (key == "diag.geodesic") set_bool(c.diag_geodesic);
    else if (key == "seed") {
      if (auto v = to_uint(value)) c.seed = *v;
      else bad("a non-negative integer");
    } else if (key == "output.dir") {
      if (value.empty()) bad("a path");
      else c.output_dir = value;
    } else if (key == "output.fields") set_bool(c.write_fields);
    else {
      error(line_no, key, "unknown key");
    }
  }

  for (const auto& [k, b] : bumps) {
    const std::string prefix = "bump." + std::to_string(k);
    if (!b.center) error(b.line, prefix + ".center", "missing");
    if (!b.amplitude) error(b.line, prefix + ".amplitude", "missing");
    if (!b.width) error(b.line, prefix + ".width", "missing");
    if (b.center && b.amplitude && b.width) c.bumps.push_back({*b.center, *b.amplitude, *b.width});
  }
  if (!cylinders.empty()) {
    c.cylinders.clear();
    for (const auto& [k, cy] : cylinders) {
      const std::string prefix = "cylinder." + std::to_string(k);
      if (!cy.direction) error(cy.line, prefix + ".direction", "missing");
      if (!cy.L) error(cy.line, prefix + ".L", "missing");
      if (cy.direction && cy.L) c.cylinders.push_back({*cy.direction, *cy.L});
    }
  }
  if (!sources.empty()) {
    c.geodesic_sources.clear();
    for (const auto& [k, x] : sources) c.geodesic_sources.push_back(x);
  }

  auto line_of = [&](const std::string& key) {
    auto it = key_line.find(key);
    return it == key_line.end() ? 0 : it->second;
  };
  for (ConfigError e : validate_config(c)) {
    if (e.line == 0) e.line = line_of(e.key);
    res.errors.push_back(e);
  }
  return res;
}

std::vector<ConfigError> validate_config(const RunConfig& c) {
  std::vector<ConfigError> errs;
  auto range = [&](const std::string& key, const std::string& reason) { errs.push_back({0, key, reason}); };

  if (!(c.m_core >= 0.0)) range("m_core", "must be >= 0 (nonnegative scalar curvature)");
  if (!(c.s_reg > 0.0)) range("s_reg", "must be > 0");
  for (std::size_t k = 0; k < c.bumps.size(); ++k) {
    const std::string prefix = "bump." + std::to_string(k + 1);
    if (!(c.bumps[k].amplitude >= 0.0)) range(prefix + ".amplitude", "must be >= 0 (nonnegative scalar curvature)");
    if (!(c.bumps[k].width > 0.0)) range(prefix + ".width", "must be > 0");
  }
  bool grid_ok = true;
  if (!(c.h > 0.0)) {
    range("grid.h", "must be > 0");
    grid_ok = false;
  }
  if (!(c.L_box > 0.0)) {
    range("grid.L_box", "must be > 0");
    grid_ok = false;
  }
  if (grid_ok) {
    try {
      (void)GridSpec(c.h, c.L_box);
    } catch (const std::invalid_argument& e) {
      range("grid.h", e.what());
      grid_ok = false;
    }
  }
  if (!(c.r0 > 0.0) || (grid_ok && !(c.r0 < c.L_box))) range("region.r0", "must lie in (0, grid.L_box)");
  if (c.tau_mode == TauMode::Fixed) {
    if (!(c.tau0 > 0.0 && c.tau0 < 0.25)) range("tau.tau0", "must lie in (0, 1/4)");
  } else {
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0 / 192.0)) range("tau.epsilon", "must lie in (0, 1/192)");
    else if (c.m_core >= 0.0 && c.s_reg > 0.0) {
      const double t = c.tau();
      if (!(t > 0.0 && t < 0.25))
        range("tau.epsilon", "tau = m^epsilon = " + num(t) + " lies outside (0, 1/4) for this member");
    }
  }
  if (c.cylinders.empty()) range("cylinder", "at least one cylinder is required");
  for (std::size_t k = 0; k < c.cylinders.size(); ++k) {
    const std::string prefix = "cylinder." + std::to_string(k + 1);
    if (!(norm(c.cylinders[k].direction) > 0.0)) range(prefix + ".direction", "must be nonzero");
    if (!(c.cylinders[k].L > 0.0)) range(prefix + ".L", "must be > 0");
  }
  if (!(c.coverage_D > 0.0)) range("coverage.D", "must be > 0");
  if (!(c.coverage_voxel >= 0.0) || (c.h > 0.0 && c.coverage_voxel > c.h))
    range("coverage.voxel", "must lie in [0, grid.h] (0 means grid.h)");
  if (c.injectivity_pairs < 10000) range("injectivity.pairs", "must be >= 10000");
  if (c.geodesic_sources.empty()) range("geodesic.source", "at least one source is required");
  if (!(c.lambda >= 0.0)) range("geodesic.lambda", "must be >= 0");
  if (c.bg_radii.empty()) range("geodesic.bg_radii", "must not be empty");
  for (std::size_t i = 0; i < c.bg_radii.size(); ++i)
    if (!(c.bg_radii[i] > 0.0) || (i > 0 && !(c.bg_radii[i] > c.bg_radii[i - 1]))) {
      range("geodesic.bg_radii", "must be positive and strictly increasing");
      break;
    }
  if (!(c.solver_tol > 0.0 && c.solver_tol < 1e-3)) range("solver.tol", "must lie in (0, 1e-3)");
  return errs;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "name = " << c.name << "\n";
  out << "m_core = " << num(c.m_core) << "\n";
  out << "s_reg = " << num(c.s_reg) << "\n";
  for (std::size_t k = 0; k < c.bumps.size(); ++k) {
    const std::string p = "bump." + std::to_string(k + 1);
    out << p << ".center = " << vec(c.bumps[k].center) << "\n";
    out << p << ".amplitude = " << num(c.bumps[k].amplitude) << "\n";
    out << p << ".width = " << num(c.bumps[k].width) << "\n";
  }
  out << "grid.h = " << num(c.h) << "\n";
  out << "grid.L_box = " << num(c.L_box) << "\n";
  out << "region.r0 = " << num(c.r0) << "\n";
  out << "tau.mode = " << (c.tau_mode == TauMode::Fixed ? "fixed" : "power") << "\n";
  out << "tau.tau0 = " << num(c.tau0) << "\n";
  out << "tau.epsilon = " << num(c.epsilon) << "\n";
  for (std::size_t k = 0; k < c.cylinders.size(); ++k) {
    const std::string p = "cylinder." + std::to_string(k + 1);
    out << p << ".direction = " << vec(c.cylinders[k].direction) << "\n";
    out << p << ".L = " << num(c.cylinders[k].L) << "\n";
  }
  out << "coverage.D = " << num(c.coverage_D) << "\n";
  out << "coverage.voxel = " << num(c.coverage_voxel) << "\n";
  out << "coverage.base_point = " << vec(c.base_point) << "\n";
  out << "injectivity.pairs = " << c.injectivity_pairs << "\n";
  for (std::size_t k = 0; k < c.geodesic_sources.size(); ++k)
    out << "geodesic.source." << k + 1 << " = " << vec(c.geodesic_sources[k]) << "\n";
  out << "geodesic.lambda = " << num(c.lambda) << "\n";
  out << "geodesic.bg_center = " << vec(c.bg_center) << "\n";
  out << "geodesic.bg_radii = ";
  for (std::size_t i = 0; i < c.bg_radii.size(); ++i) out << (i ? ", " : "") << num(c.bg_radii[i]);
  out << "\n";
  out << "solver.tol = " << num(c.solver_tol) << "\n";
  out << "diag.mass = " << (c.diag_mass ? "true" : "false") << "\n";
  out << "diag.region = " << (c.diag_region ? "true" : "false") << "\n";
  out << "diag.geodesic = " << (c.diag_geodesic ? "true" : "false") << "\n";
  out << "seed = " << c.seed << "\n";
  out << "output.dir = " << c.output_dir << "\n";
  out << "output.fields = " << (c.write_fields ? "true" : "false") << "\n";
  return out.str();
}

std::string format_error(const ConfigError& e) {
  std::string s = e.line > 0 ? "line " + std::to_string(e.line) + ": " : "";
  if (!e.key.empty()) s += e.key + ": ";
  return s + e.reason;
}

}  // namespace pmt
