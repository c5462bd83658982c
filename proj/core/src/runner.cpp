#include "sliphom/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "sliphom/epsilon_model.hpp"
#include "sliphom/evolution.hpp"

namespace sliphom {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

// RFC-4180 rows: comma separators, CRLF line endings.
class CsvWriter {
 public:
  explicit CsvWriter(const fs::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
  }
  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << "\r\n";
  }

 private:
  std::ofstream out_;
};

std::string fmt(double v) { return format_double(v); }

struct ManifestTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void write_manifest(const fs::path& dir, const RunConfig& cfg, uint64_t seed,
                    const std::string& command, double wall_seconds) {
  ordered_json derived;
  const Vec2 gh = hat_g(cfg.load, cfg.quad_grid());
  derived["g_hat"] = {gh.x, gh.y};
  const Interval K = shear_interval(cfg.slip, cfg.lambda);
  derived["shear_interval"] = {{"lo", K.lo}, {"hi", K.hi}};
  std::vector<double> eps;
  for (int P : cfg.P_list) eps.push_back(2.0 / P);
  derived["epsilon_list"] = eps;

  ordered_json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["command"] = command;
  m["seed"] = seed;
  m["wall_time_s"] = wall_seconds;
  m["derived"] = derived;
  m["config"] = cfg.raw_text;

  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << m.dump(2) << "\n";
}

bool wants(const RunConfig& cfg, const std::string& f) {
  for (const std::string& x : cfg.formats) {
    if (x == f) return true;
  }
  return false;
}

void write_profile_csv(const fs::path& path, const ShearProfile& p) {
  CsvWriter csv(path);
  csv.row({"x2", "gamma", "Gamma"});
  for (int i = 0; i < p.n(); ++i) {
    const double x2 = p.grid().midpoint(i);
    csv.row({fmt(x2), fmt(p.gamma(i)), fmt(p.value_at(x2))});
  }
}

template <class State>
void write_trajectory_csv(const fs::path& path, const Trajectory<State>& traj) {
  CsvWriter csv(path);
  csv.row({"t", "theta", "energy", "diss_increment", "diss_total", "balance_residual",
           "stability_margin", "slack"});
  for (const KnotRecord& r : traj.records) {
    csv.row({fmt(r.t), fmt(r.theta), fmt(r.energy), fmt(r.diss_increment), fmt(r.diss_total),
             fmt(r.balance_residual), fmt(r.stability_margin), fmt(r.slack)});
  }
}

fs::path prepare_dir(const std::string& out_dir) {
  fs::path dir(out_dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

int cmd_static(const RunConfig& cfg, const std::string& out_dir, uint64_t seed,
               const std::string& command, bool quiet) {
  ManifestTimer timer;
  const fs::path dir = prepare_dir(out_dir);

  const StaticSolution sol =
      minimize_I(cfg.load, cfg.slip, cfg.lambda, cfg.grid(), cfg.quad_grid(), cfg.solver);

  if (wants(cfg, "csv")) write_profile_csv(dir / "profile.csv", sol.state.shear);
  if (wants(cfg, "json")) {
    ordered_json j;
    j["theta"] = sol.state.theta;
    j["value_I"] = sol.value_I;
    j["value_J"] = sol.value_J;
    j["lambda_vec"] = {sol.lambda_at_opt.x, sol.lambda_at_opt.y};
    j["multiplicity"] = sol.multiplicity == RotationMultiplicity::free ? "free" : "unique";
    std::vector<double> gamma(sol.state.shear.gamma().begin(), sol.state.shear.gamma().end());
    std::vector<double> nodes(sol.state.shear.node_values().begin(),
                              sol.state.shear.node_values().end());
    j["gamma"] = gamma;
    j["Gamma"] = nodes;
    std::ofstream out(dir / "solution.json", std::ios::binary);
    out << j.dump(2) << "\n";
  }
  write_manifest(dir, cfg, seed, command, timer.seconds());
  if (!quiet) {
    std::cout << "static: value_I = " << format_double(sol.value_I)
              << ", value_J = " << format_double(sol.value_J) << ", theta = "
              << format_double(sol.state.theta) << ", multiplicity = "
              << (sol.multiplicity == RotationMultiplicity::free ? "free" : "unique") << "\n";
  }
  return 0;
}

int cmd_evolve(const RunConfig& cfg, const std::string& out_dir, uint64_t seed,
               const std::string& command, bool quiet) {
  ManifestTimer timer;
  const fs::path dir = prepare_dir(out_dir);
  if (!cfg.slip.is_e1_axis() && !cfg.slip.is_e2_axis()) {
    std::cerr << "evolve: slip direction must be e1 or e2\n";
    return 2;
  }

  const LimitSystem sys(cfg.slip, cfg.lambda, cfg.grid(), cfg.quad_grid());
  const LoadPath path = cfg.effective_path();

  std::vector<std::pair<double, double>> residual_table;  // (fineness, sup residual)
  for (size_t run = 0; run < cfg.steps_list.size(); ++run) {
    const TimePartition part = cfg.partition(cfg.steps_list[run]);
    auto traj = evolve(sys, sys.initial_state(path.at(0.0), cfg.solver), path, cfg.dissipation,
                       part, cfg.solver);
    add_stability_margins(sys, traj, path, cfg.dissipation, cfg.stability_competitors, seed,
                          cfg.solver);
    residual_table.emplace_back(part.fineness(), traj.max_balance_residual());
    const bool finest = run + 1 == cfg.steps_list.size();
    if (finest && wants(cfg, "csv")) {
      write_trajectory_csv(dir / "trajectory.csv", traj);
      write_profile_csv(dir / "final_profile.csv", traj.states.back().shear);
    }
  }
  if (cfg.steps_list.size() > 1 && wants(cfg, "csv")) {
    CsvWriter csv(dir / "residuals.csv");
    csv.row({"nu", "sup_balance_residual"});
    for (auto& [nu, r] : residual_table) csv.row({fmt(nu), fmt(r)});
  }
  write_manifest(dir, cfg, seed, command, timer.seconds());
  if (!quiet) std::cout << "evolve: wrote " << (dir / "trajectory.csv").string() << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::string& out_dir, uint64_t seed,
              const std::string& command, bool quiet) {
  ManifestTimer timer;
  const fs::path dir = prepare_dir(out_dir);

  if (cfg.sweep_mode == "static") {
    if (!cfg.slip.is_e1_axis() && !cfg.slip.is_e2_axis()) {
      std::cerr << "sweep: static sweeps need slip e1 or e2\n";
      return 2;
    }
    const auto rows = static_gamma_sweep(cfg.load, cfg.slip, cfg.lambda, cfg.P_list, cfg.grid(),
                                         cfg.quad_grid(), cfg.solver);
    CsvWriter csv(dir / "sweep_static.csv");
    csv.row({"P", "epsilon", "min_eps", "limit_min", "gap", "recovery_gap"});
    for (const SweepRow& r : rows) {
      csv.row({std::to_string(r.P), fmt(r.epsilon), fmt(r.min_eps), fmt(r.limit_min), fmt(r.gap),
               fmt(r.recovery_gap)});
    }
  } else {
    EvScenario scenario = EvScenario::e1_rig;
    if (cfg.scenario == "e2_plain") scenario = EvScenario::e2_plain;
    if (cfg.scenario == "e1_reg") scenario = EvScenario::e1_reg;
    EvParams params;
    params.lambda = cfg.lambda;
    params.n_cells = cfg.n_cells;
    params.n_x1 = cfg.n_x1;
    params.reg_bump_amplitude_scale = cfg.reg_bump;
    params.opts = cfg.solver;
    const LoadPath path = cfg.effective_path();
    const LoadPath* pert = cfg.perturbation ? &*cfg.perturbation : nullptr;
    const EvReport report =
        ev_gamma_experiment(scenario, path, pert, cfg.P_list, cfg.partition(cfg.steps_list.back()),
                            cfg.dissipation, params);
    CsvWriter csv(dir / "sweep_evolution.csv");
    csv.row({"P", "epsilon", "sup_energy_gap", "sup_diss_gap", "sup_penalty", "mutual_margin"});
    for (const EvRow& r : report.rows) {
      csv.row({std::to_string(r.P), fmt(r.epsilon), fmt(r.sup_energy_gap), fmt(r.sup_diss_gap),
               fmt(r.sup_penalty), fmt(r.mutual_margin)});
    }
    write_trajectory_csv(dir / "limit_trajectory.csv", report.limit);
  }
  write_manifest(dir, cfg, seed, command, timer.seconds());
  if (!quiet) std::cout << "sweep: wrote tables under " << dir.string() << "\n";
  return 0;
}

}  // namespace sliphom
