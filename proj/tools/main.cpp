#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "checks.hpp"
#include "sliphom/config.hpp"
#include "sliphom/runner.hpp"

namespace {

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

int run_with_config(int (*cmd)(const sliphom::RunConfig&, const std::string&, uint64_t,
                               const std::string&, bool),
                    const std::string& config_path, const std::string& out_dir, uint64_t seed,
                    const std::string& command) {
  try {
    const sliphom::RunConfig cfg = sliphom::load_config_file(config_path);
    return cmd(cfg, out_dir, seed, command, false);
  } catch (const sliphom::ConfigError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}

int run_verify(const std::string& level, uint64_t seed, const std::string& out_dir) {
  using namespace sliphom::checks;
  const auto start = std::chrono::steady_clock::now();
  std::vector<CheckResult> results = run_properties(
      level == "full" ? Level::full : Level::fast, seed);
  if (level == "full") {
    for (CheckResult& r : run_acceptance(seed)) {
      r.id = "acceptance " + r.id;
      results.push_back(std::move(r));
    }
  }
  std::ostringstream report;
  int failures = 0;
  for (const CheckResult& r : results) {
    report << (r.pass ? "[PASS] " : "[FAIL] ") << r.id;
    if (!r.pass) {
      report << " -- " << r.detail;
      ++failures;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "  (%.2fs)", r.seconds);
    report << buf << "\n";
  }
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report << (failures == 0 ? "PASS" : "FAIL") << ": " << results.size() - failures << "/"
         << results.size() << " checks passed in " << total << " s (level " << level << ")\n";
  std::cout << report.str();
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(std::filesystem::path(out_dir) / "verify_report.txt", std::ios::binary);
    out << report.str();
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solvers for the homogenized single-slip model of bilayered composites"};
  app.set_version_flag("--version", std::string(sliphom::kToolVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", level = "fast";
  uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", config_path, "config file")->required();
    }
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed");
  };

  CLI::App* s_static = app.add_subcommand("static", "minimize the loaded homogenized energy");
  add_common(s_static, true);
  CLI::App* s_evolve = app.add_subcommand("evolve", "quasistatic incremental evolution");
  add_common(s_evolve, true);
  CLI::App* s_sweep = app.add_subcommand("sweep", "homogenization convergence tables");
  add_common(s_sweep, true);
  CLI::App* s_verify = app.add_subcommand("verify", "run the verification suites");
  s_verify->add_option("--level", level, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}));
  s_verify->add_option("--seed", seed, "random seed");
  std::string verify_out;
  s_verify->add_option("--out", verify_out, "optional report directory");

  CLI11_PARSE(app, argc, argv);
  const std::string command = join_args(argc, argv);

  if (s_static->parsed()) {
    return run_with_config(sliphom::cmd_static, config_path, out_dir, seed, command);
  }
  if (s_evolve->parsed()) {
    return run_with_config(sliphom::cmd_evolve, config_path, out_dir, seed, command);
  }
  if (s_sweep->parsed()) {
    return run_with_config(sliphom::cmd_sweep, config_path, out_dir, seed, command);
  }
  return run_verify(level, seed, verify_out);
}
