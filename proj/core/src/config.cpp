#include "sliphom/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace sliphom {

namespace {

struct Entry {
  std::string section;
  std::string key;
  std::vector<std::string> values;
  int line;
};

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<Entry> tokenize(const std::string& text) {
  std::vector<Entry> entries;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(lineno, "empty section name");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(lineno, "expected 'key = value' or '[section]'");
    }
    Entry e;
    e.section = section;
    e.key = trim(line.substr(0, eq));
    e.line = lineno;
    if (e.key.empty()) throw ConfigError(lineno, "empty key");
    std::istringstream vals(line.substr(eq + 1));
    std::string tok;
    while (vals >> tok) e.values.push_back(tok);
    if (e.values.empty()) throw ConfigError(lineno, "missing value for key '" + e.key + "'");
    entries.push_back(std::move(e));
  }
  return entries;
}

double parse_double(const Entry& e, size_t idx) {
  try {
    size_t pos = 0;
    const double v = std::stod(e.values.at(idx), &pos);
    if (pos != e.values[idx].size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(e.line, "key '" + e.key + "': '" + e.values[idx] + "' is not a number");
  }
}

int parse_int(const Entry& e, size_t idx) {
  try {
    size_t pos = 0;
    const int v = std::stoi(e.values.at(idx), &pos);
    if (pos != e.values[idx].size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(e.line, "key '" + e.key + "': '" + e.values[idx] + "' is not an integer");
  }
}

void expect_count(const Entry& e, size_t n) {
  if (e.values.size() != n) {
    throw ConfigError(e.line, "key '" + e.key + "': expected " + std::to_string(n) +
                                  " values, got " + std::to_string(e.values.size()));
  }
}

Mat2 parse_mat(const Entry& e, size_t offset) {
  return {parse_double(e, offset), parse_double(e, offset + 1), parse_double(e, offset + 2),
          parse_double(e, offset + 3)};
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  cfg.raw_text = text;
  const std::vector<Entry> entries = tokenize(text);

  // Load assembly state.
  std::string load_kind = "affine";
  int load_kind_line = 0;
  Mat2 A{};
  Vec2 b{};
  std::vector<LoadField::Term> terms;
  std::vector<std::pair<double, LoadField>> path_knots;
  std::vector<std::pair<double, LoadField>> pert_knots;
  std::optional<Vec2> slip_components;
  std::optional<double> slip_angle;
  int slip_line = 0;
  int p_line = 1, scenario_line = 1, path_line = 1, diss_line = 1;

  for (const Entry& e : entries) {
    const std::string id = e.section + "." + e.key;
    if (id == "slip.s") {
      expect_count(e, 2);
      slip_components = Vec2{parse_double(e, 0), parse_double(e, 1)};
      slip_line = e.line;
    } else if (id == "slip.angle_deg") {
      expect_count(e, 1);
      slip_angle = parse_double(e, 0);
      slip_line = e.line;
    } else if (id == "microstructure.lambda") {
      expect_count(e, 1);
      cfg.lambda = parse_double(e, 0);
      if (cfg.lambda <= 0.0 || cfg.lambda >= 1.0) {
        throw ConfigError(e.line, "lambda must lie strictly between 0 and 1");
      }
    } else if (id == "microstructure.P") {
      expect_count(e, 1);
      cfg.P_list = {parse_int(e, 0)};
      if (cfg.P_list[0] < 1) throw ConfigError(e.line, "P must be >= 1");
      p_line = e.line;
    } else if (id == "microstructure.P_list") {
      cfg.P_list.clear();
      p_line = e.line;
      for (size_t i = 0; i < e.values.size(); ++i) {
        const int P = parse_int(e, i);
        if (P < 1) throw ConfigError(e.line, "P_list entries must be >= 1");
        cfg.P_list.push_back(P);
      }
    } else if (id == "grid.n_cells") {
      expect_count(e, 1);
      cfg.n_cells = parse_int(e, 0);
      if (cfg.n_cells < 1) throw ConfigError(e.line, "n_cells must be >= 1");
    } else if (id == "grid.n_x1") {
      expect_count(e, 1);
      cfg.n_x1 = parse_int(e, 0);
      if (cfg.n_x1 < 1) throw ConfigError(e.line, "n_x1 must be >= 1");
    } else if (id == "grid.n_x2") {
      expect_count(e, 1);
      cfg.n_x2 = parse_int(e, 0);
      if (cfg.n_x2 < 1) throw ConfigError(e.line, "n_x2 must be >= 1");
    } else if (id == "load.kind") {
      expect_count(e, 1);
      load_kind = e.values[0];
      load_kind_line = e.line;
      if (load_kind != "affine" && load_kind != "constant" && load_kind != "polynomial") {
        throw ConfigError(e.line, "load kind must be affine, constant, or polynomial");
      }
    } else if (id == "load.A") {
      expect_count(e, 4);
      A = parse_mat(e, 0);
    } else if (id == "load.b") {
      expect_count(e, 2);
      b = {parse_double(e, 0), parse_double(e, 1)};
    } else if (id == "load.term") {
      expect_count(e, 8);
      LoadField::Term t;
      t.a = parse_mat(e, 0);
      t.p = parse_int(e, 4);
      t.q = parse_int(e, 5);
      t.r = parse_int(e, 6);
      t.s = parse_int(e, 7);
      for (int ex : {t.p, t.q, t.r, t.s}) {
        if (ex < 0) throw ConfigError(e.line, "term exponents must be >= 0");
      }
      terms.push_back(t);
    } else if (id == "load.path.knot" || id == "load.pert.knot") {
      expect_count(e, 7);
      const double t = parse_double(e, 0);
      const LoadField f =
          LoadField::affine(parse_mat(e, 1), {parse_double(e, 5), parse_double(e, 6)});
      auto& dst = (id == "load.path.knot") ? path_knots : pert_knots;
      if (!dst.empty() && t <= dst.back().first) {
        throw ConfigError(e.line, "knot times must be strictly increasing");
      }
      if (id == "load.path.knot") path_line = e.line;
      dst.emplace_back(t, f);
    } else if (id == "time.T") {
      expect_count(e, 1);
      cfg.T = parse_double(e, 0);
      if (cfg.T <= 0.0) throw ConfigError(e.line, "T must be > 0");
    } else if (id == "time.steps") {
      expect_count(e, 1);
      cfg.steps_list = {parse_int(e, 0)};
      if (cfg.steps_list[0] < 1) throw ConfigError(e.line, "steps must be >= 1");
    } else if (id == "time.step_list") {
      cfg.steps_list.clear();
      for (size_t i = 0; i < e.values.size(); ++i) {
        const int s = parse_int(e, i);
        if (s < 1) throw ConfigError(e.line, "step_list entries must be >= 1");
        cfg.steps_list.push_back(s);
      }
    } else if (id == "dissipation.kind") {
      expect_count(e, 1);
      diss_line = e.line;
      if (e.values[0] == "L1") {
        cfg.dissipation.kind = DissipationKind::L1;
      } else if (e.values[0] == "monotone") {
        cfg.dissipation.kind = DissipationKind::monotone;
      } else {
        throw ConfigError(e.line, "dissipation kind must be L1 or monotone");
      }
    } else if (id == "dissipation.delta") {
      expect_count(e, 1);
      cfg.dissipation.delta = parse_double(e, 0);
      if (cfg.dissipation.delta <= 0.0) throw ConfigError(e.line, "delta must be > 0");
    } else if (id == "solver.n_angles") {
      expect_count(e, 1);
      cfg.solver.n_angles = parse_int(e, 0);
      if (cfg.solver.n_angles < 4) throw ConfigError(e.line, "n_angles must be >= 4");
    } else if (id == "solver.angle_tol") {
      expect_count(e, 1);
      cfg.solver.angle_tol = parse_double(e, 0);
      if (cfg.solver.angle_tol <= 0.0) throw ConfigError(e.line, "angle_tol must be > 0");
    } else if (id == "sweep.mode") {
      expect_count(e, 1);
      cfg.sweep_mode = e.values[0];
      if (cfg.sweep_mode != "static" && cfg.sweep_mode != "evolution") {
        throw ConfigError(e.line, "sweep mode must be static or evolution");
      }
    } else if (id == "sweep.scenario") {
      expect_count(e, 1);
      scenario_line = e.line;
      cfg.scenario = e.values[0];
      if (cfg.scenario != "e2_plain" && cfg.scenario != "e1_rig" && cfg.scenario != "e1_reg") {
        throw ConfigError(e.line, "scenario must be e2_plain, e1_rig, or e1_reg");
      }
    } else if (id == "sweep.bump") {
      expect_count(e, 1);
      cfg.reg_bump = parse_double(e, 0);
    } else if (id == "stability.n_competitors") {
      expect_count(e, 1);
      cfg.stability_competitors = parse_int(e, 0);
      if (cfg.stability_competitors < 0) throw ConfigError(e.line, "n_competitors must be >= 0");
    } else if (id == "output.formats") {
      cfg.formats.clear();
      for (const std::string& f : e.values) {
        if (f != "csv" && f != "json") throw ConfigError(e.line, "formats must be csv or json");
        cfg.formats.push_back(f);
      }
    } else {
      throw ConfigError(e.line, "unknown key '" + e.key + "' in section [" + e.section + "]");
    }
  }

  if (slip_components && slip_angle) {
    throw ConfigError(slip_line, "give either slip components or slip angle, not both");
  }
  try {
    if (slip_components) {
      const double n = slip_components->norm();
      if (n == 0.0) throw std::invalid_argument("slip vector must be nonzero");
      cfg.slip = SlipSystem({slip_components->x / n, slip_components->y / n});
    } else if (slip_angle) {
      cfg.slip = SlipSystem::from_angle_deg(*slip_angle);
    }
  } catch (const std::exception& ex) {
    throw ConfigError(slip_line, ex.what());
  }

  if (load_kind == "polynomial") {
    if (terms.empty()) {
      throw ConfigError(load_kind_line, "polynomial load needs at least one term");
    }
    cfg.load = LoadField::polynomial(terms);
  } else if (load_kind == "constant") {
    cfg.load = LoadField::constant(b);
  } else {
    cfg.load = LoadField::affine(A, b);
  }

  auto build_path = [&](std::vector<std::pair<double, LoadField>>& knots, const char* what,
                        int line) -> std::optional<LoadPath> {
    if (knots.empty()) return std::nullopt;
    std::vector<double> ts;
    std::vector<LoadField> fs;
    for (auto& [t, f] : knots) {
      ts.push_back(t);
      fs.push_back(f);
    }
    try {
      return LoadPath::table(std::move(ts), std::move(fs));
    } catch (const std::exception& ex) {
      throw ConfigError(line, std::string(what) + ": " + ex.what());
    }
  };
  cfg.path = build_path(path_knots, "load.path", path_line);
  cfg.perturbation = build_path(pert_knots, "load.pert", path_line);
  if (cfg.path && std::abs(cfg.path->T() - cfg.T) > 1e-12) {
    throw ConfigError(path_line, "load.path must end at time T");
  }
  if (cfg.perturbation && std::abs(cfg.perturbation->T() - cfg.T) > 1e-12) {
    throw ConfigError(path_line, "load.pert must end at time T");
  }

  // Construct the governed objects once so invariant violations surface now.
  for (int P : cfg.P_list) {
    try {
      soft_mask(Microstructure(cfg.lambda, P), cfg.grid());
    } catch (const std::exception& ex) {
      throw ConfigError(p_line, std::string("microstructure/grid alignment: ") + ex.what());
    }
  }
  if (cfg.sweep_mode == "evolution") {
    const bool e1 = cfg.slip.is_e1_axis();
    const bool e2 = cfg.slip.is_e2_axis();
    if ((cfg.scenario == "e2_plain" && !e2) ||
        ((cfg.scenario == "e1_rig" || cfg.scenario == "e1_reg") && !e1)) {
      throw ConfigError(scenario_line,
                        "scenario '" + cfg.scenario + "' does not match the slip direction");
    }
    if (cfg.scenario == "e1_reg" && cfg.dissipation.kind != DissipationKind::L1) {
      throw ConfigError(diss_line, "scenario e1_reg requires dissipation kind L1");
    }
  }
  return cfg;
}

RunConfig load_config_file(const std::string& file_path) {
  std::ifstream in(file_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + file_path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace sliphom
