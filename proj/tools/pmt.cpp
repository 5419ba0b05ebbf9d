#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pmt/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pmt;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kPipeline = 2;

struct Loaded {
  RunConfig config;
  bool ok = false;
};

Loaded load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << path << ": cannot open\n";
    return {};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  ParseResult res = parse_config(ss.str());
  for (const ConfigError& e : res.errors) std::cerr << path << ": " << format_error(e) << "\n";
  return {res.config, res.ok()};
}

void print_result(const MemberResult& r) {
  const CsvTable t = rows_table({r});
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (t.rows[0][i] == "nan" || t.rows[0][i].empty()) continue;
    std::printf("%-28s %s\n", t.columns[i].c_str(), t.rows[0][i].c_str());
  }
  for (const StageTime& st : r.times) std::printf("time %-23s %.2f s\n", st.stage.c_str(), st.seconds);
}

int run_single(const std::string& path, const Stages& stages, const std::string& out_override, bool no_fields) {
  Loaded l = load_config(path);
  if (!l.ok) return kValidation;
  if (!out_override.empty()) l.config.output_dir = out_override;
  if (no_fields) l.config.write_fields = false;
  MemberResult r;
  try {
    r = run_member(l.config, stages, true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kPipeline;
  }
  print_result(r);
  std::printf("artifacts in %s\n", (fs::path(l.config.output_dir) / l.config.name).string().c_str());
  if (!r.ok) {
    std::cerr << "failed: " << r.failure << "\n";
    return kPipeline;
  }
  return kOk;
}

int run_sweep(const std::string& list_path, const std::string& out_override, bool no_fields) {
  std::ifstream in(list_path);
  if (!in) {
    std::cerr << list_path << ": cannot open\n";
    return kValidation;
  }
  const fs::path base = fs::path(list_path).parent_path();
  std::vector<RunConfig> configs;
  bool valid = true;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto b = line.find_first_not_of(" \t\r"), e = line.find_last_not_of(" \t\r");
    if (b == std::string::npos) continue;
    fs::path p = line.substr(b, e - b + 1);
    if (p.is_relative()) p = base / p;
    Loaded l = load_config(p.string());
    valid = valid && l.ok;
    configs.push_back(l.config);
  }
  if (configs.empty()) {
    std::cerr << list_path << ": no configs listed\n";
    return kValidation;
  }
  std::string out_dir = out_override.empty() ? configs.front().output_dir : out_override;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (out_override.empty() && configs[i].output_dir != out_dir) {
      std::cerr << list_path << ": member " << configs[i].name << " writes to " << configs[i].output_dir
                << ", expected " << out_dir << " (or pass --out)\n";
      valid = false;
    }
    for (std::size_t k = 0; k < i; ++k)
      if (configs[k].name == configs[i].name) {
        std::cerr << list_path << ": duplicate member name " << configs[i].name << "\n";
        valid = false;
      }
  }
  if (!valid) return kValidation;

  bool all_ok = true;
  for (RunConfig& c : configs) {
    c.output_dir = out_dir;
    if (no_fields) c.write_fields = false;
    std::printf("member %s (m_exact = %g)\n", c.name.c_str(), c.factor().m_exact());
    std::fflush(stdout);
    const MemberResult r = run_member(c, Stages{}, true);
    double total = 0.0;
    for (const StageTime& st : r.times) total += st.seconds;
    if (r.ok) {
      std::printf("  ok in %.1f s\n", total);
    } else {
      std::printf("  failed: %s\n", r.failure.c_str());
      all_ok = false;
    }
    std::fflush(stdout);
  }
  try {
    const SweepSummary s = write_report(out_dir);
    std::printf("report in %s (fits %s)\n", out_dir.c_str(), s.fits_run ? "run" : s.skip_reason.c_str());
  } catch (const std::exception& e) {
    std::cerr << "report: " << e.what() << "\n";
    return kPipeline;
  }
  return all_ok ? kOk : kPipeline;
}

int run_report(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    std::cerr << dir << ": not a directory\n";
    return kValidation;
  }
  try {
    const SweepSummary s = write_report(dir);
    std::ifstream fits(fs::path(dir) / "fits.csv");
    std::cout << fits.rdbuf();
    (void)s;
  } catch (const std::exception& e) {
    std::cerr << "report: " << e.what() << "\n";
    return kPipeline;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic-coordinate diagnostics for small-mass asymptotically flat metrics"};
  app.require_subcommand(1);
  std::string config_path, list_path, report_dir, out_dir;
  bool no_fields = false;

  auto add_member_cmd = [&](const char* name, const char* help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option("config", config_path, "member config file")->required();
    cmd->add_option("--out", out_dir, "override output.dir");
    cmd->add_flag("--no-fields", no_fields, "skip the binary node-field artifacts");
    return cmd;
  };
  CLI::App* solve = add_member_cmd("solve", "solve for the harmonic coordinates");
  CLI::App* mass = add_member_cmd("mass", "solve, then ADM mass, mass inequality and sup diagnostics");
  CLI::App* region = add_member_cmd("region", "solve, then the regular region, cylinders and coverage");
  CLI::App* sweep = app.add_subcommand("sweep", "run every config in a list, then write the report");
  sweep->add_option("config-list", list_path, "file with one config path per line")->required();
  sweep->add_option("--out", out_dir, "output directory for all members");
  sweep->add_flag("--no-fields", no_fields, "skip the binary node-field artifacts");
  CLI::App* report = app.add_subcommand("report", "merge member rows, fit trends, write plots");
  report->add_option("dir", report_dir, "sweep output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  if (*solve) return run_single(config_path, Stages{false, false, false}, out_dir, no_fields);
  if (*mass) return run_single(config_path, Stages{true, false, false}, out_dir, no_fields);
  if (*region) return run_single(config_path, Stages{false, true, false}, out_dir, no_fields);
  if (*sweep) return run_sweep(list_path, out_dir, no_fields);
  return run_report(report_dir);
}
