// petzlab sweep --config <file> [--timings]
// petzlab audit --setting <name> --points <n>
//
// Exit codes: 0 success, 1 runtime/io failure, 2 invariant violation, 3 config error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "petzlab/bench.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitViolation = 2;
constexpr int kExitConfig = 3;

bool is_config_error(petzlab::ErrorKind k) {
  return k == petzlab::ErrorKind::ParseError || k == petzlab::ErrorKind::ValidationError;
}

int run_sweep_cmd(const std::string& path, const std::string& out_override, bool timings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "petzlab: cannot read config '" << path << "'\n";
    return kExitConfig;
  }
  std::stringstream text;
  text << in.rdbuf();
  petzlab::SweepConfig cfg;
  try {
    cfg = petzlab::parse_config(text.str());
    petzlab::apply_env_workers(cfg);
  } catch (const petzlab::Error& e) {
    std::cerr << "petzlab: " << path << ": " << e.what() << "\n";
    return kExitConfig;
  }
  if (!out_override.empty()) cfg.out = out_override;

  const auto points = petzlab::run_sweep(cfg);
  std::size_t failed = 0;
  for (const auto& pt : points) failed += pt.flags.rfind("error:", 0) == 0 ? 1 : 0;
  if (cfg.out.empty() || cfg.out == "-") {
    petzlab::emit_csv(points, std::cout, timings);
  } else {
    petzlab::emit_csv(points, cfg.out, timings);
  }
  if (failed) std::cerr << "petzlab: " << failed << " of " << points.size() << " points failed (see flags column)\n";
  return 0;
}

int run_audit_cmd(const std::string& setting, std::size_t points) {
  petzlab::SweepConfig cfg;
  try {
    std::ostringstream text;
    text << "setting = " << setting << "\np_count = " << points << "\n";
    cfg = petzlab::parse_config(text.str());
    petzlab::apply_env_workers(cfg);
  } catch (const petzlab::Error& e) {
    std::cerr << "petzlab: " << e.what() << "\n";
    return kExitConfig;
  }
  const auto report = petzlab::audit_invariants(cfg);
  for (const auto& e : report.entries) {
    char p[32];
    std::snprintf(p, sizeof p, "%.6g", e.p);
    std::cout << (e.passed ? "ok   " : "FAIL ") << report.setting << " p=" << p << " " << e.check;
    if (!e.detail.empty()) std::cout << " (" << e.detail << ")";
    std::cout << "\n";
  }
  std::cout << report.entries.size() << " checks, " << report.violations() << " violations\n";
  return report.ok() ? 0 : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoder fidelity sweeps and invariant audits"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  bool timings = false;
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write CSV");
  sweep->add_option("--config", config_path, "Sweep config file")->required();
  sweep->add_option("--out", out_path, "Output path, overrides the config ('-' for stdout)");
  sweep->add_flag("--timings", timings, "Write wall times (makes output run-dependent)");

  std::string setting;
  std::size_t points = 21;
  auto* audit = app.add_subcommand("audit", "Check invariants on a p grid");
  audit->add_option("--setting", setting, "Setting name")->required();
  audit->add_option("--points", points, "Grid size on [0, 1]")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sweep) return run_sweep_cmd(config_path, out_path, timings);
    return run_audit_cmd(setting, points);
  } catch (const petzlab::Error& e) {
    std::cerr << "petzlab: " << e.what() << "\n";
    return is_config_error(e.kind()) ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "petzlab: " << e.what() << "\n";
    return kExitRuntime;
  }
}
