#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sliphom/config.hpp"
#include "sliphom/geometry.hpp"
#include "sliphom/runner.hpp"

using namespace sliphom;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("sliphom_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

constexpr const char* kBasicConfig =
    "# basic static run\n"
    "[slip]\n"
    "s = 1 0\n"
    "[microstructure]\n"
    "lambda = 0.5\n"
    "P = 4\n"
    "[grid]\n"
    "n_cells = 32\n"
    "n_x1 = 8\n"
    "n_x2 = 32\n"
    "[load]\n"
    "kind = affine\n"
    "A = 1 1 0 0\n"
    "b = 0 0\n";

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("defaults fill unspecified sections") {
    const RunConfig cfg = parse_config_text(kBasicConfig);
    CHECK(cfg.lambda == 0.5);
    CHECK(cfg.n_cells == 32);
    CHECK(cfg.solver.n_angles == 64);
    CHECK(cfg.dissipation.kind == DissipationKind::L1);
  }
  SUBCASE("slip normalization from components") {
    const RunConfig cfg = parse_config_text("[slip]\ns = 2 0\n");
    CHECK(cfg.slip.s().x == doctest::Approx(1.0));
  }
  SUBCASE("slip from degrees") {
    const RunConfig cfg = parse_config_text("[slip]\nangle_deg = 90\n");
    CHECK(cfg.slip.is_e2_axis());
  }
  SUBCASE("line-precise errors") {
    try {
      parse_config_text("[slip]\ns = 1 0\n[microstructure]\nlambda = 2.0\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& ex) {
      CHECK(ex.line() == 4);
    }
  }
  SUBCASE("unknown keys are rejected with their line") {
    try {
      parse_config_text("[solver]\nwat = 1\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& ex) {
      CHECK(ex.line() == 2);
    }
  }
  SUBCASE("misaligned microstructure is a config error") {
    CHECK_THROWS_AS(parse_config_text("[microstructure]\nlambda = 0.3\nP = 2\n"
                                      "[grid]\nn_cells = 8\n"),
                    ConfigError);
  }
  SUBCASE("scenario/slip mismatch is a config error") {
    const std::string text =
        "[slip]\ns = 0 1\n[sweep]\nmode = evolution\nscenario = e1_rig\n";
    CHECK_THROWS_AS(parse_config_text(text), ConfigError);
  }
  SUBCASE("polynomial loads parse term lists") {
    const RunConfig cfg = parse_config_text(
        "[load]\nkind = polynomial\nterm = 1 0 0 1 1 1 3 1\nterm = 0 1 1 0 0 0 0 0\n");
    CHECK(cfg.load.kind() == LoadField::Kind::polynomial);
    CHECK(cfg.load.terms().size() == 2);
  }
  SUBCASE("time tables build load paths") {
    const RunConfig cfg = parse_config_text(
        "[time]\nT = 2\n[load.path]\nknot = 0 1 0 0 0 0 0\nknot = 2 2 0 0 0 0 0\n");
    REQUIRE(cfg.path.has_value());
    CHECK(cfg.path->at(1.0).A().a11 == doctest::Approx(1.5));
  }
}

TEST_CASE("static command writes solution, profile, and manifest") {
  const RunConfig cfg = parse_config_text(kBasicConfig);
  const fs::path dir = fresh_dir("static");
  CHECK(cmd_static(cfg, dir.string(), 3, "sliphom static --config c") == 0);
  CHECK(fs::exists(dir / "solution.json"));
  CHECK(fs::exists(dir / "profile.csv"));
  CHECK(fs::exists(dir / "manifest.json"));

  const nlohmann::json sol = nlohmann::json::parse(slurp(dir / "solution.json"));
  CHECK(sol.at("gamma").size() == 32);
  CHECK(sol.at("Gamma").size() == 33);
  CHECK(sol.at("multiplicity") == "unique");

  const std::string profile = slurp(dir / "profile.csv");
  CHECK(profile.rfind("x2,gamma,Gamma\r\n", 0) == 0);

  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("tool") == "sliphom");
  CHECK(manifest.at("seed") == 3);
  CHECK(manifest.at("derived").contains("g_hat"));
}

TEST_CASE("evolve command emits the trajectory table") {
  const std::string text = std::string(kBasicConfig) +
                           "[time]\nT = 1\nsteps = 5\n[dissipation]\nkind = L1\ndelta = 0.1\n";
  const RunConfig cfg = parse_config_text(text);
  const fs::path dir = fresh_dir("evolve");
  CHECK(cmd_evolve(cfg, dir.string(), 3, "sliphom evolve") == 0);
  const std::string traj = slurp(dir / "trajectory.csv");
  CHECK(traj.rfind("t,theta,energy,diss_increment,diss_total,balance_residual,"
                   "stability_margin,slack\r\n",
                   0) == 0);
  // Header plus one row per knot.
  CHECK(std::count(traj.begin(), traj.end(), '\n') == 7);
}

TEST_CASE("evolve refinement flag emits the residual table") {
  const std::string text = std::string(kBasicConfig) +
                           "[time]\nT = 1\nstep_list = 5 10\n[dissipation]\ndelta = 0.1\n";
  const RunConfig cfg = parse_config_text(text);
  const fs::path dir = fresh_dir("evolve_refine");
  CHECK(cmd_evolve(cfg, dir.string(), 3, "sliphom evolve") == 0);
  CHECK(fs::exists(dir / "residuals.csv"));
}

TEST_CASE("sweep commands") {
  SUBCASE("static sweep table") {
    const std::string text = std::string(kBasicConfig) + "[sweep]\nmode = static\n" +
                             "[microstructure]\nP_list = 2 4 8\n";
    const RunConfig cfg = parse_config_text(text);
    const fs::path dir = fresh_dir("sweep_static");
    CHECK(cmd_sweep(cfg, dir.string(), 3, "sliphom sweep") == 0);
    const std::string table = slurp(dir / "sweep_static.csv");
    CHECK(table.rfind("P,epsilon,min_eps,limit_min,gap,recovery_gap\r\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 4);
  }
  SUBCASE("evolution sweep table") {
    const std::string text = std::string(kBasicConfig) +
                             "[sweep]\nmode = evolution\nscenario = e1_rig\n"
                             "[microstructure]\nP_list = 2 4\n"
                             "[time]\nT = 1\nsteps = 4\n"
                             "[dissipation]\nkind = monotone\ndelta = 0.05\n"
                             "[load.path]\nknot = 0 2 2 0 0 0 0\nknot = 1 0 0 0 0 0 0\n";
    const RunConfig cfg = parse_config_text(text);
    const fs::path dir = fresh_dir("sweep_evolution");
    CHECK(cmd_sweep(cfg, dir.string(), 3, "sliphom sweep") == 0);
    const std::string table = slurp(dir / "sweep_evolution.csv");
    CHECK(table.rfind("P,epsilon,sup_energy_gap,sup_diss_gap,sup_penalty,mutual_margin\r\n", 0) ==
          0);
    CHECK(fs::exists(dir / "limit_trajectory.csv"));
  }
}

TEST_CASE("emitted potential of a coupled affine load fits a cubic") {
  const std::string text =
      "[slip]\ns = 1 0\n[grid]\nn_cells = 256\nn_x1 = 8\nn_x2 = 256\n"
      "[load]\nkind = affine\nA = 1 1 0 0\nb = 0 0\n";
  const RunConfig cfg = parse_config_text(text);
  const fs::path dir = fresh_dir("cubic");
  REQUIRE(cmd_static(cfg, dir.string(), 0, "x", true) == 0);
  const nlohmann::json sol = nlohmann::json::parse(slurp(dir / "solution.json"));
  const std::vector<double> nodes = sol.at("Gamma").get<std::vector<double>>();
  // Least-squares fit against alpha x^3 + gamma x on the emitted node values.
  const Grid1D grid(256);
  double s33 = 0, s31 = 0, s11 = 0, b3 = 0, b1 = 0;
  for (int i = 0; i <= grid.n(); ++i) {
    const double x = grid.node(i), x3 = x * x * x;
    s33 += x3 * x3;
    s31 += x3 * x;
    s11 += x * x;
    b3 += x3 * nodes[i];
    b1 += x * nodes[i];
  }
  const double det = s33 * s11 - s31 * s31;
  const double alpha = (b3 * s11 - b1 * s31) / det;
  const double gam = (s33 * b1 - s31 * b3) / det;
  double acc = 0.0;
  for (int i = 0; i <= grid.n(); ++i) {
    const double x = grid.node(i);
    const double r = nodes[i] - (alpha * x * x * x + gam * x);
    acc += grid.h() * r * r;
  }
  CHECK(std::sqrt(acc) <= 1e-4);
  CHECK(std::abs(alpha) > 1e-3);  // genuinely cubic
}

TEST_CASE("constant loads are reported with a free rotation") {
  const std::string text =
      "[slip]\ns = 1 0\n[grid]\nn_cells = 16\nn_x1 = 4\nn_x2 = 16\n"
      "[load]\nkind = constant\nb = 0.7 -0.2\n";
  const RunConfig cfg = parse_config_text(text);
  const fs::path dir = fresh_dir("freecase");
  REQUIRE(cmd_static(cfg, dir.string(), 0, "x", true) == 0);
  const nlohmann::json sol = nlohmann::json::parse(slurp(dir / "solution.json"));
  CHECK(sol.at("multiplicity") == "free");
  for (double g : sol.at("gamma").get<std::vector<double>>()) CHECK(std::abs(g) <= 1e-12);
}

TEST_CASE("identical config and seed reproduce outputs byte for byte") {
  const RunConfig cfg = parse_config_text(kBasicConfig);
  const fs::path d1 = fresh_dir("repro1");
  const fs::path d2 = fresh_dir("repro2");
  cmd_static(cfg, d1.string(), 9, "x");
  cmd_static(cfg, d2.string(), 9, "x");
  CHECK(slurp(d1 / "profile.csv") == slurp(d2 / "profile.csv"));
  CHECK(slurp(d1 / "solution.json") == slurp(d2 / "solution.json"));

  const std::string etext = std::string(kBasicConfig) +
                            "[time]\nT = 1\nsteps = 5\n[dissipation]\ndelta = 0.1\n";
  const RunConfig ecfg = parse_config_text(etext);
  const fs::path e1 = fresh_dir("repro_ev1");
  const fs::path e2 = fresh_dir("repro_ev2");
  cmd_evolve(ecfg, e1.string(), 9, "x", true);
  cmd_evolve(ecfg, e2.string(), 9, "x", true);
  CHECK(slurp(e1 / "trajectory.csv") == slurp(e2 / "trajectory.csv"));
}

TEST_CASE("manifest replay reproduces the result files") {
  const RunConfig cfg = parse_config_text(kBasicConfig);
  const fs::path d1 = fresh_dir("replay1");
  cmd_static(cfg, d1.string(), 5, "x");
  const nlohmann::json manifest = nlohmann::json::parse(slurp(d1 / "manifest.json"));
  const RunConfig replay = parse_config_text(manifest.at("config").get<std::string>());
  const fs::path d2 = fresh_dir("replay2");
  cmd_static(replay, d2.string(), manifest.at("seed").get<uint64_t>(), "replay");
  CHECK(slurp(d1 / "profile.csv") == slurp(d2 / "profile.csv"));
  CHECK(slurp(d1 / "solution.json") == slurp(d2 / "solution.json"));
}
