#include "sliphom/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sliphom {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TimePartition TimePartition::uniform(double T, int n_steps) {
  if (T <= 0.0 || n_steps < 1) {
    throw std::invalid_argument("TimePartition: need T > 0 and n_steps >= 1");
  }
  TimePartition p;
  p.knots.resize(n_steps + 1);
  for (int k = 0; k <= n_steps; ++k) p.knots[k] = T * static_cast<double>(k) / n_steps;
  return p;
}

double TimePartition::fineness() const {
  double nu = 0.0;
  for (size_t k = 1; k < knots.size(); ++k) nu = std::max(nu, knots[k] - knots[k - 1]);
  return nu;
}

// ---------------------------------------------------------------------------
// LimitSystem

LimitSystem::LimitSystem(SlipSystem sl, double lambda, Grid1D grid, Grid2D hatg_grid)
    : slip_(sl), lambda_(lambda), grid_(grid), hatg_grid_(hatg_grid) {}

LimitSystem::State LimitSystem::initial_state(const LoadField& g0,
                                              const SolverOptions& opts) const {
  return minimize_I(g0, slip_, lambda_, grid_, hatg_grid_, opts).state;
}

double LimitSystem::energy(const LoadField& g_t, const State& q) const {
  return energy_I(q, g_t, lambda_, hatg_grid_);
}

LimitSystem::State LimitSystem::step(const LoadField& g_t, const State& prev,
                                     const DissipationSpec& d, const SolverOptions& opts,
                                     StepOutcome* out) const {
  if (out) out->slack = 0.0;
  if (slip_.is_e2_axis()) {
    const Vec2 gh = hat_g(g_t, hatg_grid_);
    const double theta = gh.norm() > opts.tol_lambda(gh.norm())
                             ? detail::wrap_angle(std::atan2(gh.y, gh.x))
                             : prev.theta;
    return {theta, ShearProfile::zero(grid_), slip_};
  }

  const LambdaMap map = assemble_lambda_map(g_t, grid_, hatg_grid_);
  const auto w = detail::stored_weights(slip_, lambda_, grid_);
  detail::SeparableProblem sp;
  sp.quad.assign(grid_.n(), w.quad);
  sp.lin.assign(grid_.n(), w.lin);
  sp.lambda_coeff = map.coeff;
  sp.g_hat = map.g_hat;
  sp.box = shear_interval(slip_, lambda_);
  sp.prox_weight.assign(grid_.n(), d.delta * cell_measure());
  sp.prox_center.assign(prev.shear.gamma().begin(), prev.shear.gamma().end());
  sp.monotone = (d.kind == DissipationKind::monotone);

  const auto opt = sp.minimize(opts, prev.theta);
  if (out) out->slack = opt.slack;
  const double tol = opts.tol_lambda(map.g_hat.norm());
  const double theta = opt.lambda.norm() > tol
                           ? detail::wrap_angle(std::atan2(opt.d.y, opt.d.x))
                           : prev.theta;
  return {theta, ShearProfile(grid_, opt.gamma), slip_};
}

double LimitSystem::dissipation(const DissipationSpec& d, const State& prev,
                                const State& next) const {
  return dissipation_cells(d, prev.shear.gamma(), next.shear.gamma(), cell_measure());
}

double LimitSystem::load_pairing(const LoadField& dg, const State& q) const {
  return lambda_vec(dg, q.shear, hatg_grid_).dot(q.rot_e1());
}

LimitSystem::State LimitSystem::random_competitor(const State& q, const DissipationSpec& d,
                                                  Rng& rng) const {
  const double theta = rng.uniform(0.0, kTwoPi);
  if (slip_.is_e2_axis()) return {theta, ShearProfile::zero(grid_), slip_};
  const Interval K = shear_interval(slip_, lambda_);
  const double amp = 0.5 * (1.0 + q.shear.max_abs_gamma());
  std::vector<double> gamma(grid_.n());
  for (int i = 0; i < grid_.n(); ++i) {
    double gi;
    if (d.kind == DissipationKind::monotone) {
      gi = q.shear.gamma(i) - rng.uniform(0.0, amp);
    } else {
      gi = q.shear.gamma(i) + rng.uniform(-amp, amp);
    }
    gamma[i] = K.clamp(gi);
  }
  return {theta, ShearProfile(grid_, std::move(gamma)), slip_};
}

std::vector<LimitSystem::State> LimitSystem::structured_competitors(
    const LoadField& g_t, const State& q, const SolverOptions& opts) const {
  std::vector<State> out;
  out.push_back(minimize_I(g_t, slip_, lambda_, grid_, hatg_grid_, opts).state);
  out.push_back({q.theta, ShearProfile::zero(grid_), slip_});
  for (int k = 0; k < 16; ++k) {
    out.push_back({detail::wrap_angle(q.theta + kTwoPi * k / 16.0), q.shear, slip_});
  }
  return out;
}

// ---------------------------------------------------------------------------
// EpsRigSystem

EpsRigSystem::EpsRigSystem(Microstructure ms, Grid1D grid, Grid2D hatg_grid)
    : ms_(ms), grid_(grid), hatg_grid_(hatg_grid), mask_(soft_mask(ms, grid)) {}

EpsRigSystem::State EpsRigSystem::initial_state(const LoadField& g0,
                                                const SolverOptions& opts) const {
  const StaticSolution sol = minimize_eps_rig(g0, ms_, grid_, hatg_grid_, opts);
  EpsShearProfile shear{grid_, ms_, mask_, std::vector<double>(grid_.n(), 0.0)};
  for (int i = 0; i < grid_.n(); ++i) {
    if (mask_[i]) shear.gamma[i] = sol.state.shear.gamma(i);
  }
  return {sol.state.theta, shear};
}

double EpsRigSystem::energy(const LoadField& g_t, const State& q) const {
  return energy_eps(q, &g_t, &hatg_grid_);
}

EpsRigSystem::State EpsRigSystem::step(const LoadField& g_t, const State& prev,
                                       const DissipationSpec& d, const SolverOptions& opts,
                                       StepOutcome* out) const {
  prev.shear.validate();
  const LambdaMap map = assemble_lambda_map(g_t, grid_, hatg_grid_);
  detail::SeparableProblem sp;
  sp.quad.assign(grid_.n(), 0.0);
  for (int i = 0; i < grid_.n(); ++i) {
    if (mask_[i]) sp.quad[i] = cell_measure();
  }
  sp.lin.assign(grid_.n(), 0.0);
  sp.lambda_coeff = map.coeff;
  sp.g_hat = map.g_hat;
  sp.box = Interval::all();
  sp.prox_weight.assign(grid_.n(), d.delta * cell_measure());
  sp.prox_center.assign(prev.shear.gamma.begin(), prev.shear.gamma.end());
  sp.monotone = (d.kind == DissipationKind::monotone);

  const auto opt = sp.minimize(opts, prev.theta);
  if (out) out->slack = opt.slack;
  const double tol = opts.tol_lambda(map.g_hat.norm());
  const double theta = opt.lambda.norm() > tol
                           ? detail::wrap_angle(std::atan2(opt.d.y, opt.d.x))
                           : prev.theta;
  EpsShearProfile shear{grid_, ms_, mask_, opt.gamma};
  return {theta, shear};
}

double EpsRigSystem::dissipation(const DissipationSpec& d, const State& prev,
                                 const State& next) const {
  return dissipation_cells(d, prev.shear.gamma, next.shear.gamma, cell_measure());
}

double EpsRigSystem::load_pairing(const LoadField& dg, const State& q) const {
  return lambda_vec(dg, q.shear.to_profile(), hatg_grid_).dot(q.rot_e1());
}

EpsRigSystem::State EpsRigSystem::random_competitor(const State& q, const DissipationSpec& d,
                                                    Rng& rng) const {
  State c = q;
  c.theta = rng.uniform(0.0, kTwoPi);
  double amp = 0.5;
  for (int i = 0; i < grid_.n(); ++i) {
    if (q.shear.mask[i]) amp = std::max(amp, 0.5 * (1.0 + std::abs(q.shear.gamma[i])));
  }
  for (int i = 0; i < grid_.n(); ++i) {
    if (!q.shear.mask[i]) continue;
    if (d.kind == DissipationKind::monotone) {
      c.shear.gamma[i] = q.shear.gamma[i] - rng.uniform(0.0, amp);
    } else {
      c.shear.gamma[i] = q.shear.gamma[i] + rng.uniform(-amp, amp);
    }
  }
  return c;
}

std::vector<EpsRigSystem::State> EpsRigSystem::structured_competitors(
    const LoadField& g_t, const State& q, const SolverOptions& opts) const {
  std::vector<State> out;
  out.push_back(initial_state(g_t, opts));  // fine-scale minimizer at t
  EpsShearProfile zero{grid_, ms_, mask_, std::vector<double>(grid_.n(), 0.0)};
  out.push_back({q.theta, zero});
  for (int k = 0; k < 16; ++k) {
    out.push_back({detail::wrap_angle(q.theta + kTwoPi * k / 16.0), q.shear});
  }
  return out;
}

// ---------------------------------------------------------------------------
// RegSystem

RegSystem::RegSystem(Microstructure ms, Grid2D field_grid, double tau, Grid2D hatg_grid)
    : ms_(ms),
      field_grid_(field_grid),
      tau_(tau),
      hatg_grid_(hatg_grid),
      row_mask_(soft_mask(ms, field_grid.x2_grid())) {
  if (tau <= 0.0) throw std::invalid_argument("RegSystem: tau must be > 0");
  const int nx = field_grid_.nx();
  if (nx < 2) throw std::invalid_argument("RegSystem: need at least two x1 cells");
  // Quadratic form of the x1 differences (last column repeats the previous
  // difference, matching dislocation_density).
  penalty_matrix_.assign(static_cast<size_t>(nx) * nx, 0.0);
  auto add_pair = [&](int a, int b) {
    penalty_matrix_[a * nx + a] += 1.0;
    penalty_matrix_[b * nx + b] += 1.0;
    penalty_matrix_[a * nx + b] -= 1.0;
    penalty_matrix_[b * nx + a] -= 1.0;
  };
  for (int k = 0; k + 1 < nx; ++k) add_pair(k, k + 1);
  add_pair(nx - 2, nx - 1);
}

RegSystem::State RegSystem::initial_state(const DeformationState& limit_q0,
                                          double bump_amplitude) const {
  if (limit_q0.shear.grid().n() != field_grid_.ny()) {
    throw std::invalid_argument("RegSystem: limit profile must live on the x2 grid");
  }
  EpsShearField2D f = EpsShearField2D::zero(ms_, field_grid_);
  const Grid1D x1 = field_grid_.x1_grid();
  for (int iy = 0; iy < field_grid_.ny(); ++iy) {
    if (!row_mask_[iy]) continue;
    const double base = limit_q0.shear.gamma(iy) / ms_.lambda;
    for (int ix = 0; ix < field_grid_.nx(); ++ix) {
      f.at(ix, iy) = base + bump_amplitude * std::sin(std::numbers::pi * x1.midpoint(ix));
    }
  }
  return {limit_q0.theta, f};
}

double RegSystem::energy(const LoadField& g_t, const State& q) const {
  return energy_eps_reg(q.field, q.theta, &g_t, tau_, &hatg_grid_);
}

namespace {

// Cyclic coordinate descent for one row:
//   min  a0 sum gamma_i^2 + c gamma^T M gamma + b_r sum gamma_i
//        + w sum |gamma_i - p_i|    (optionally gamma_i <= p_i)
// The objective is strictly convex and the nonsmooth part separable, so the
// sweeps converge to the row minimum.
double solve_row_cd(int nx, double a0, double c, double b_r, double w,
                    const double* p, bool cap, const double* M, std::vector<double>& gamma) {
  auto objective = [&]() {
    double v = 0.0;
    for (int i = 0; i < nx; ++i) {
      v += a0 * gamma[i] * gamma[i] + b_r * gamma[i] + w * std::abs(gamma[i] - p[i]);
      double mi = 0.0;
      for (int j = 0; j < nx; ++j) mi += M[i * nx + j] * gamma[j];
      v += c * gamma[i] * mi;
    }
    return v;
  };
  double prev_obj = objective();
  for (int sweep = 0; sweep < 2000; ++sweep) {
    for (int i = 0; i < nx; ++i) {
      const double a = a0 + c * M[i * nx + i];
      double cross = 0.0;
      for (int j = 0; j < nx; ++j) {
        if (j != i) cross += M[i * nx + j] * gamma[j];
      }
      const double b = b_r + 2.0 * c * cross;
      gamma[i] = detail::solve_cell(a, b, w, p[i], Interval::all(), cap);
    }
    const double obj = objective();
    if (prev_obj - obj <= 1e-14 * (1.0 + std::abs(obj))) return obj;
    prev_obj = obj;
  }
  return prev_obj;
}

}  // namespace

RegSystem::State RegSystem::step(const LoadField& g_t, const State& prev,
                                 const DissipationSpec& d, const SolverOptions& opts,
                                 StepOutcome* out) const {
  prev.field.validate();
  const int nx = field_grid_.nx();
  const int ny = field_grid_.ny();
  const Grid1D rows = field_grid_.x2_grid();
  const std::vector<Vec2> coeff = lambda_coefficients(g_t, rows);
  const Vec2 gh = hat_g(g_t, hatg_grid_);

  const double a0 = cell_measure();
  const double c = tau_ * field_grid_.hy() / field_grid_.hx();
  const double w = d.delta * cell_measure();
  const bool cap = (d.kind == DissipationKind::monotone);

  // State and value for a fixed direction; rows decouple.
  std::vector<double> work(prev.field.gamma.size());
  std::vector<double> row(nx);
  auto solve_direction = [&](Vec2 dvec, std::vector<double>& gamma) -> double {
    gamma = prev.field.gamma;  // warm start
    double value = -dvec.dot(gh);
    for (int iy = 0; iy < ny; ++iy) {
      if (!row_mask_[iy]) continue;  // rigid rows stay at zero
      const double b_r = -dvec.dot(coeff[iy]) * 0.5 * field_grid_.hx();
      std::vector<double> p(nx), g0(nx);
      for (int ix = 0; ix < nx; ++ix) {
        p[ix] = prev.field.at(ix, iy);
        g0[ix] = gamma[ix * ny + iy];
      }
      row = g0;
      value += solve_row_cd(nx, a0, c, b_r, w, p.data(), cap, penalty_matrix_.data(), row);
      for (int ix = 0; ix < nx; ++ix) gamma[ix * ny + iy] = row[ix];
    }
    return value;
  };
  auto lambda_of = [&](const std::vector<double>& gamma) -> Vec2 {
    Vec2 lam = gh;
    const double wx = 0.5 * field_grid_.hx();
    for (int iy = 0; iy < ny; ++iy) {
      double avg = 0.0;
      for (int ix = 0; ix < nx; ++ix) avg += gamma[ix * ny + iy];
      lam += (wx * avg) * coeff[iy];
    }
    return lam;
  };

  auto eval = [&](double theta) -> detail::DirectionEval {
    const double v = solve_direction(rotation_e1(theta), work);
    return {v, lambda_of(work).norm()};
  };
  const detail::ScanResult scan = detail::direction_scan(eval, opts, prev.theta);
  if (out) out->slack = scan.slack;

  Vec2 dvec = rotation_e1(scan.theta);
  std::vector<double> gamma;
  Vec2 lam;
  for (int it = 0; it < 200; ++it) {
    solve_direction(dvec, gamma);
    lam = lambda_of(gamma);
    const double ln = lam.norm();
    if (ln <= 1e-30) break;
    const Vec2 dn{lam.x / ln, lam.y / ln};
    if ((dn - dvec).norm() <= 1e-13) break;
    dvec = dn;
  }
  const double tol = opts.tol_lambda(gh.norm());
  const double theta = lam.norm() > tol ? detail::wrap_angle(std::atan2(dvec.y, dvec.x))
                                        : prev.theta;
  EpsShearField2D field = prev.field;
  field.gamma = std::move(gamma);
  return {theta, field};
}

double RegSystem::dissipation(const DissipationSpec& d, const State& prev,
                              const State& next) const {
  return dissipation_cells(d, prev.field.gamma, next.field.gamma, cell_measure());
}

double RegSystem::load_pairing(const LoadField& dg, const State& q) const {
  return lambda_vec(dg, q.field.x1_average(), hatg_grid_).dot(rotation_e1(q.theta));
}

RegSystem::State RegSystem::random_competitor(const State& q, const DissipationSpec& d,
                                              Rng& rng) const {
  State c = q;
  c.theta = rng.uniform(0.0, kTwoPi);
  double amp = 0.5;
  for (double v : q.field.gamma) amp = std::max(amp, 0.5 * (1.0 + std::abs(v)));
  for (int iy = 0; iy < field_grid_.ny(); ++iy) {
    if (!row_mask_[iy]) continue;
    for (int ix = 0; ix < field_grid_.nx(); ++ix) {
      if (d.kind == DissipationKind::monotone) {
        c.field.at(ix, iy) = q.field.at(ix, iy) - rng.uniform(0.0, amp);
      } else {
        c.field.at(ix, iy) = q.field.at(ix, iy) + rng.uniform(-amp, amp);
      }
    }
  }
  return c;
}

std::vector<RegSystem::State> RegSystem::structured_competitors(const LoadField&, const State& q,
                                                                const SolverOptions&) const {
  std::vector<State> out;
  out.push_back({q.theta, EpsShearField2D::zero(ms_, field_grid_)});
  // x1-averaged version of the current field: same work, no penalty.
  EpsShearField2D avg = q.field;
  const ShearProfile prof = q.field.x1_average();
  for (int iy = 0; iy < field_grid_.ny(); ++iy) {
    const double v = row_mask_[iy] ? prof.gamma(iy) : 0.0;
    for (int ix = 0; ix < field_grid_.nx(); ++ix) avg.at(ix, iy) = v;
  }
  out.push_back({q.theta, avg});
  for (int k = 0; k < 16; ++k) {
    out.push_back({detail::wrap_angle(q.theta + kTwoPi * k / 16.0), q.field});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::pair<DeformationState, StepOutcome> incremental_step_limit(
    double t, const DeformationState& prev, const LoadPath& path, const DissipationSpec& d,
    const SlipSystem& sl, double lambda, const Grid1D& grid, const Grid2D& hatg_grid,
    const SolverOptions& opts) {
  const LimitSystem sys(sl, lambda, grid, hatg_grid);
  StepOutcome out{0.0};
  DeformationState q = sys.step(path.at(t), prev, d, opts, &out);
  return {std::move(q), out};
}

std::pair<EpsState, StepOutcome> incremental_step_eps(double t, const EpsState& prev,
                                                      const LoadPath& path,
                                                      const DissipationSpec& d,
                                                      const Microstructure& ms, const Grid1D& grid,
                                                      const Grid2D& hatg_grid,
                                                      const SolverOptions& opts) {
  const EpsRigSystem sys(ms, grid, hatg_grid);
  StepOutcome out{0.0};
  EpsState q = sys.step(path.at(t), prev, d, opts, &out);
  return {std::move(q), out};
}

std::optional<DeformationState> closed_form_e2(const LoadPath& path, double t, const Grid1D& grid,
                                               const Grid2D& hatg_grid) {
  const Vec2 gh = hat_g(path.at(t), hatg_grid);
  if (gh.norm() <= SolverOptions{}.tol_lambda(gh.norm())) return std::nullopt;
  return DeformationState{detail::wrap_angle(std::atan2(gh.y, gh.x)), ShearProfile::zero(grid),
                          SlipSystem({0.0, 1.0})};
}

std::vector<double> closed_form_e2_residuals(const LoadPath& path, const TimePartition& part,
                                             const Grid1D& grid, const Grid2D& hatg_grid) {
  (void)grid;
  // Resultants at the table knots; between them the resultant is linear in t.
  const std::vector<double>& tk = path.knots();
  std::vector<Vec2> gh(tk.size());
  for (size_t j = 0; j < tk.size(); ++j) gh[j] = hat_g(path.at(tk[j]), hatg_grid);
  auto gh_at = [&](double t) -> Vec2 {
    if (t <= tk.front()) return gh.front();
    if (t >= tk.back()) return gh.back();
    size_t j = 1;
    while (tk[j] < t) ++j;
    const double s = (t - tk[j - 1]) / (tk[j] - tk[j - 1]);
    return (1.0 - s) * gh[j - 1] + s * gh[j];
  };
  auto gh_rate = [&](double t) -> Vec2 {  // constant on each table interval
    size_t j = 1;
    while (j + 1 < tk.size() && tk[j] <= t) ++j;
    return (1.0 / (tk[j] - tk[j - 1])) * (gh[j] - gh[j - 1]);
  };

  // Five-point Gauss-Legendre nodes/weights on (-1,1).
  static const double gx[5] = {-0.9061798459386639928, -0.5384693101056830910, 0.0,
                               0.5384693101056830910, 0.9061798459386639928};
  static const double gw[5] = {0.2369268850561890875, 0.4786286704993664680, 0.5688888888888888889,
                               0.4786286704993664680, 0.2369268850561890875};
  auto integrate = [&](double a, double b) {
    // Split at the table knots; the integrand is smooth on each piece.
    std::vector<double> cuts{a};
    for (double t : tk) {
      if (t > a && t < b) cuts.push_back(t);
    }
    cuts.push_back(b);
    double acc = 0.0;
    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
      const int sub = 4;
      for (int s = 0; s < sub; ++s) {
        const double lo = cuts[c] + (cuts[c + 1] - cuts[c]) * s / sub;
        const double hi = cuts[c] + (cuts[c + 1] - cuts[c]) * (s + 1) / sub;
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int i = 0; i < 5; ++i) {
          const double t = mid + half * gx[i];
          const Vec2 v = gh_at(t);
          const double vn = v.norm();
          if (vn <= 1e-300) {
            throw std::invalid_argument("closed_form_e2_residuals: vanishing resultant");
          }
          acc += half * gw[i] * gh_rate(t).dot({v.x / vn, v.y / vn});
        }
      }
    }
    return acc;
  };

  std::vector<double> residuals(part.knots.size());
  const double e0 = -gh_at(part.knots.front()).norm();
  double work = 0.0;
  residuals[0] = 0.0;
  for (size_t k = 1; k < part.knots.size(); ++k) {
    work += integrate(part.knots[k - 1], part.knots[k]);
    const double ek = -gh_at(part.knots[k]).norm();
    residuals[k] = std::abs(ek - e0 + work);
  }
  return residuals;
}

// ---------------------------------------------------------------------------

EvReport ev_gamma_experiment(EvScenario scenario, const LoadPath& g0, const LoadPath* perturbation,
                             const std::vector<int>& P_list, const TimePartition& part,
                             const DissipationSpec& d, const EvParams& params) {
  const Grid1D grid(params.n_cells);
  const Grid2D hatg_grid(params.n_x1, params.n_cells);
  const SolverOptions& opts = params.opts;

  auto path_for = [&](double eps) -> LoadPath {
    if (perturbation == nullptr || eps == 0.0) return g0;
    return LoadPath::lin_comb(1.0, g0, eps, *perturbation);
  };

  EvReport report{scenario, {}, {}, 0.0};

  if (scenario == EvScenario::e2_plain) {
    const SlipSystem e2({0.0, 1.0});
    const LimitSystem limit_sys(e2, params.lambda, grid, hatg_grid);
    // Limit trajectory: the closed-form energetic solution sampled at knots.
    Trajectory<DeformationState>& lt = report.limit;
    const std::vector<double> residuals = closed_form_e2_residuals(g0, part, grid, hatg_grid);
    for (size_t k = 0; k < part.knots.size(); ++k) {
      const double t = part.knots[k];
      auto q = closed_form_e2(g0, t, grid, hatg_grid);
      if (!q) throw std::invalid_argument("e2_plain: the load resultant vanishes at t");
      lt.states.push_back(*q);
      lt.records.push_back({t, q->theta, limit_sys.energy(g0.at(t), *q), 0.0, 0.0, residuals[k],
                            0.0, 0.0});
    }
    for (int P : P_list) {
      const double eps = 2.0 / P;
      const LoadPath path = path_for(eps);
      const LimitSystem sys(e2, params.lambda, grid, hatg_grid);
      auto traj = evolve(sys, sys.initial_state(path.at(0.0), opts), path, d, part, opts);
      EvRow row{P, eps, 0.0, 0.0, 0.0, 0.0};
      for (int k = 0; k < traj.n_knots(); ++k) {
        row.sup_energy_gap = std::max(
            row.sup_energy_gap, std::abs(traj.records[k].energy - lt.records[k].energy));
        row.sup_diss_gap = std::max(row.sup_diss_gap, traj.records[k].diss_total);
      }
      report.rows.push_back(row);
    }
    return report;
  }

  const SlipSystem e1({1.0, 0.0});
  const LimitSystem limit_sys(e1, params.lambda, grid, hatg_grid);
  report.limit = evolve(limit_sys, limit_sys.initial_state(g0.at(0.0), opts), g0, d, part, opts);
  for (const KnotRecord& r : report.limit.records) {
    report.limit_diss_sup = std::max(report.limit_diss_sup, r.diss_total);
  }

  for (int P : P_list) {
    const double eps = 2.0 / P;
    const LoadPath path = path_for(eps);
    const Microstructure ms(params.lambda, P);
    EvRow row{P, eps, 0.0, 0.0, 0.0, 0.0};

    if (scenario == EvScenario::e1_rig) {
      const EpsRigSystem sys(ms, grid, hatg_grid);
      auto traj = evolve(sys, sys.initial_state(path.at(0.0), opts), path, d, part, opts);
      for (int k = 0; k < traj.n_knots(); ++k) {
        row.sup_energy_gap = std::max(
            row.sup_energy_gap, std::abs(traj.records[k].energy - report.limit.records[k].energy));
        row.sup_diss_gap =
            std::max(row.sup_diss_gap,
                     std::abs(traj.records[k].diss_total - report.limit.records[k].diss_total));
      }
      // Stability-transfer margins along the limit trajectory.
      for (int k = 0; k + 1 < report.limit.n_knots(); ++k) {
        const EpsState base =
            recovery_e1(report.limit.states[k].shear, ms, report.limit.states[k].theta);
        const LoadField g_next = path.at(part.knots[k + 1]);
        const MutualRecovery mr =
            mutual_recovery_e1(base, report.limit.states[k], report.limit.states[k + 1], d,
                               &g_next, params.lambda, &hatg_grid);
        row.mutual_margin = std::max(row.mutual_margin, std::abs(mr.margin));
      }
    } else {  // e1_reg
      if (d.kind != DissipationKind::L1) {
        throw std::invalid_argument("e1_reg: requires the plain L1 dissipation");
      }
      const RegSystem sys(ms, Grid2D(params.n_x1, params.n_cells), /*tau=*/P, hatg_grid);
      const RegState q0 =
          sys.initial_state(report.limit.states[0], params.reg_bump_amplitude_scale / P);
      auto traj = evolve(sys, q0, path, d, part, opts);
      for (int k = 0; k < traj.n_knots(); ++k) {
        row.sup_energy_gap = std::max(
            row.sup_energy_gap, std::abs(traj.records[k].energy - report.limit.records[k].energy));
        row.sup_diss_gap =
            std::max(row.sup_diss_gap,
                     std::abs(traj.records[k].diss_total - report.limit.records[k].diss_total));
        if (k >= 1) row.sup_penalty = std::max(row.sup_penalty, sys.penalty(traj.states[k]));
      }
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace sliphom
