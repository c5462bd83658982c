#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sliphom/dissipation.hpp"
#include "sliphom/evolution.hpp"
#include "sliphom/loads.hpp"
#include "sliphom/static_solver.hpp"

namespace sliphom {

// Parse/validation failure with the offending line of the config text.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error("config line " + std::to_string(line) + ": " + message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct RunConfig {
  SlipSystem slip{Vec2{1.0, 0.0}};
  double lambda = 0.5;
  std::vector<int> P_list{8};

  int n_cells = 128;
  int n_x1 = 8;
  int n_x2 = 128;

  LoadField load = LoadField::zero();
  std::optional<LoadPath> path;         // time table; constant path of `load` otherwise
  std::optional<LoadPath> perturbation; // sweep perturbation, scaled by epsilon

  double T = 1.0;
  std::vector<int> steps_list{40};

  DissipationSpec dissipation{DissipationKind::L1, 0.1};
  SolverOptions solver{};

  std::string sweep_mode = "static";  // static | evolution
  std::string scenario = "e1_rig";    // e2_plain | e1_rig | e1_reg
  double reg_bump = 1.0;

  int stability_competitors = 32;
  std::vector<std::string> formats{"csv", "json"};

  std::string raw_text;

  Grid1D grid() const { return Grid1D(n_cells); }
  Grid2D quad_grid() const { return Grid2D(n_x1, n_x2); }
  LoadPath effective_path() const {
    return path ? *path : LoadPath::constant(load, T);
  }
  TimePartition partition(int steps) const { return TimePartition::uniform(T, steps); }
};

// Parses and validates; every constructed object's invariants are checked
// here so failures point at the offending line.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& file_path);

}  // namespace sliphom
