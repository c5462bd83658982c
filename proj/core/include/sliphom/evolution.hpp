#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "sliphom/dissipation.hpp"
#include "sliphom/epsilon_model.hpp"
#include "sliphom/rng.hpp"
#include "sliphom/static_solver.hpp"

namespace sliphom {

struct TimePartition {
  std::vector<double> knots;  // 0 = t_0 < ... < t_N = T

  static TimePartition uniform(double T, int n_steps);
  double fineness() const;
  int n_steps() const { return static_cast<int>(knots.size()) - 1; }
};

struct KnotRecord {
  double t = 0.0;
  double theta = 0.0;
  double energy = 0.0;
  double diss_increment = 0.0;
  double diss_total = 0.0;
  double balance_residual = 0.0;
  double stability_margin = 0.0;
  double slack = 0.0;
};

template <class State>
struct Trajectory {
  std::vector<State> states;
  std::vector<KnotRecord> records;

  int n_knots() const { return static_cast<int>(states.size()); }
  double max_balance_residual() const {
    double m = 0.0;
    for (const KnotRecord& r : records) m = std::max(m, r.balance_residual);
    return m;
  }
};

struct StepOutcome {
  double slack;  // bound on the optimality gap of the direction search
};

// Quasistatic system on the homogenized model (slip e1/e2): states are
// rotation + profile, incremental problems solve energy-plus-dissipation by
// the direction scan with per-cell soft-threshold-and-clip updates.
class LimitSystem {
 public:
  using State = DeformationState;

  LimitSystem(SlipSystem sl, double lambda, Grid1D grid, Grid2D hatg_grid);

  const SlipSystem& slip() const { return slip_; }
  double lambda() const { return lambda_; }
  const Grid1D& grid() const { return grid_; }
  const Grid2D& hatg_grid() const { return hatg_grid_; }
  double cell_measure() const { return 2.0 * grid_.h(); }

  State initial_state(const LoadField& g0, const SolverOptions& opts) const;
  double energy(const LoadField& g_t, const State& q) const;
  State step(const LoadField& g_t, const State& prev, const DissipationSpec& d,
             const SolverOptions& opts, StepOutcome* out) const;
  double dissipation(const DissipationSpec& d, const State& prev, const State& next) const;
  double load_pairing(const LoadField& dg, const State& q) const;

  State random_competitor(const State& q, const DissipationSpec& d, Rng& rng) const;
  std::vector<State> structured_competitors(const LoadField& g_t, const State& q,
                                            const SolverOptions& opts) const;

 private:
  SlipSystem slip_;
  double lambda_;
  Grid1D grid_;
  Grid2D hatg_grid_;
};

// Fine-scale laminate system for slip e1, constant rotation, free shear on
// the soft cells only.
class EpsRigSystem {
 public:
  using State = EpsState;

  EpsRigSystem(Microstructure ms, Grid1D grid, Grid2D hatg_grid);

  const Microstructure& ms() const { return ms_; }
  const Grid1D& grid() const { return grid_; }
  double cell_measure() const { return 2.0 * grid_.h(); }

  State initial_state(const LoadField& g0, const SolverOptions& opts) const;
  double energy(const LoadField& g_t, const State& q) const;
  State step(const LoadField& g_t, const State& prev, const DissipationSpec& d,
             const SolverOptions& opts, StepOutcome* out) const;
  double dissipation(const DissipationSpec& d, const State& prev, const State& next) const;
  double load_pairing(const LoadField& dg, const State& q) const;

  State random_competitor(const State& q, const DissipationSpec& d, Rng& rng) const;
  std::vector<State> structured_competitors(const LoadField& g_t, const State& q,
                                            const SolverOptions& opts) const;

 private:
  Microstructure ms_;
  Grid1D grid_;
  Grid2D hatg_grid_;
  std::vector<bool> mask_;
};

struct RegState {
  double theta;
  EpsShearField2D field;
};

// Penalized fine-scale system for slip e1: shear fields with x1 dependence,
// tau * ||d1 gamma||^2 regularization, work through the x1-averaged profile.
// Incremental problems solve per-row strictly convex quadratic + L1 models
// by cyclic coordinate descent inside the direction scan.
class RegSystem {
 public:
  using State = RegState;

  RegSystem(Microstructure ms, Grid2D field_grid, double tau, Grid2D hatg_grid);

  const Microstructure& ms() const { return ms_; }
  const Grid2D& field_grid() const { return field_grid_; }
  double tau() const { return tau_; }
  double cell_measure() const { return field_grid_.hx() * field_grid_.hy(); }

  // Recovery of a limit state plus an x1 bump of the given amplitude on the
  // soft rows (zero amplitude gives the plain recovery).
  State initial_state(const DeformationState& limit_q0, double bump_amplitude) const;
  double energy(const LoadField& g_t, const State& q) const;
  State step(const LoadField& g_t, const State& prev, const DissipationSpec& d,
             const SolverOptions& opts, StepOutcome* out) const;
  double dissipation(const DissipationSpec& d, const State& prev, const State& next) const;
  double load_pairing(const LoadField& dg, const State& q) const;
  double penalty(const State& q) const { return tau_ * reg_penalty_norm2(q.field); }

  State random_competitor(const State& q, const DissipationSpec& d, Rng& rng) const;
  std::vector<State> structured_competitors(const LoadField& g_t, const State& q,
                                            const SolverOptions& opts) const;

 private:
  Microstructure ms_;
  Grid2D field_grid_;
  double tau_;
  Grid2D hatg_grid_;
  std::vector<bool> row_mask_;
  std::vector<double> penalty_matrix_;  // nx x nx quadratic form of the x1 differences
};

// One incremental problem of the homogenized system.
std::pair<DeformationState, StepOutcome> incremental_step_limit(
    double t, const DeformationState& prev, const LoadPath& path, const DissipationSpec& d,
    const SlipSystem& sl, double lambda, const Grid1D& grid, const Grid2D& hatg_grid,
    const SolverOptions& opts = {});

// One incremental problem of the laminate system (slip e1, rigid rotations).
std::pair<EpsState, StepOutcome> incremental_step_eps(double t, const EpsState& prev,
                                                      const LoadPath& path,
                                                      const DissipationSpec& d,
                                                      const Microstructure& ms, const Grid1D& grid,
                                                      const Grid2D& hatg_grid,
                                                      const SolverOptions& opts = {});

// Dissipation distance between two shear profiles on a common grid.
inline double dissipation(const DissipationSpec& d, const ShearProfile& prev,
                          const ShearProfile& next) {
  if (prev.grid().n() != next.grid().n()) {
    throw std::invalid_argument("dissipation: profiles live on different grids");
  }
  return dissipation_cells(d, prev.gamma(), next.gamma(), 2.0 * prev.grid().h());
}

// Energy-balance defect of a trajectory at every knot: the difference
// between energy-plus-dissipation and the initial energy minus the work of
// the load rate against the piecewise-constant states. The per-interval
// time integration of the piecewise-linear load is exact.
template <class System>
std::vector<double> energy_balance_residuals(const System& sys,
                                             const Trajectory<typename System::State>& traj,
                                             const LoadPath& path) {
  std::vector<double> out(traj.n_knots(), 0.0);
  if (traj.n_knots() == 0) return out;
  const double e0 = sys.energy(path.at(traj.records[0].t), traj.states[0]);
  double work = 0.0;
  double diss = 0.0;
  for (int k = 1; k < traj.n_knots(); ++k) {
    const double t0 = traj.records[k - 1].t;
    const double t1 = traj.records[k].t;
    work += sys.load_pairing(path.delta(t0, t1), traj.states[k]);
    diss += traj.records[k].diss_increment;
    out[k] = std::abs(sys.energy(path.at(t1), traj.states[k]) + diss - e0 + work);
  }
  return out;
}

// Iterates the incremental problems over the partition knots, recording
// energies, dissipation increments, slack bounds, and the energy-balance
// residual.
template <class System>
Trajectory<typename System::State> evolve(const System& sys, const typename System::State& q0,
                                          const LoadPath& path, const DissipationSpec& d,
                                          const TimePartition& part,
                                          const SolverOptions& opts = {}) {
  Trajectory<typename System::State> traj;
  const int N = part.n_steps();
  traj.states.reserve(N + 1);
  traj.records.reserve(N + 1);

  traj.states.push_back(q0);
  const double e0 = sys.energy(path.at(part.knots[0]), q0);
  traj.records.push_back({part.knots[0], q0.theta, e0, 0.0, 0.0, 0.0, 0.0, 0.0});

  double diss_total = 0.0;
  for (int k = 1; k <= N; ++k) {
    const double t = part.knots[k];
    const LoadField g_t = path.at(t);
    StepOutcome out{0.0};
    typename System::State q = sys.step(g_t, traj.states.back(), d, opts, &out);
    const double inc = sys.dissipation(d, traj.states.back(), q);
    diss_total += inc;
    const double energy = sys.energy(g_t, q);
    traj.states.push_back(std::move(q));
    traj.records.push_back(
        {t, traj.states.back().theta, energy, inc, diss_total, 0.0, 0.0, out.slack});
  }
  const std::vector<double> residuals = energy_balance_residuals(sys, traj, path);
  for (int k = 0; k <= N; ++k) traj.records[k].balance_residual = residuals[k];
  return traj;
}

struct StabilityReport {
  double worst_margin;
  int n_checked;
};

// Samples competitors around (t, q) and reports the worst value of
// energy(competitor) + dissipation - energy(q); nonnegative margins certify
// stability within tolerance.
template <class System>
StabilityReport stability_check(const System& sys, const LoadField& g_t,
                                const typename System::State& q, const DissipationSpec& d,
                                int n_competitors, uint64_t seed,
                                const SolverOptions& opts = {}) {
  Rng rng(seed);
  const double eq = sys.energy(g_t, q);
  double worst = std::numeric_limits<double>::infinity();
  int n = 0;
  auto consider = [&](const typename System::State& c) {
    const double margin = sys.energy(g_t, c) + sys.dissipation(d, q, c) - eq;
    if (margin < worst) worst = margin;
    ++n;
  };
  consider(q);
  for (const auto& c : sys.structured_competitors(g_t, q, opts)) consider(c);
  for (int i = 0; i < n_competitors; ++i) consider(sys.random_competitor(q, d, rng));
  return {worst, n};
}

// Fills the stability_margin column of a computed trajectory.
template <class System>
void add_stability_margins(const System& sys, Trajectory<typename System::State>& traj,
                           const LoadPath& path, const DissipationSpec& d, int n_competitors,
                           uint64_t seed, const SolverOptions& opts = {}) {
  for (int k = 0; k < traj.n_knots(); ++k) {
    const LoadField g_t = path.at(traj.records[k].t);
    traj.records[k].stability_margin =
        stability_check(sys, g_t, traj.states[k], d, n_competitors, seed + k, opts).worst_margin;
  }
}

// Unique stable state of the dissipation-free limit system for slip e2:
// vanishing shear, rotation aligned with the load resultant. Undefined when
// the resultant vanishes.
std::optional<DeformationState> closed_form_e2(const LoadPath& path, double t, const Grid1D& grid,
                                               const Grid2D& hatg_grid);

// Energy-balance residuals of the closed-form trajectory at the partition
// knots, with the load-power integral evaluated by high-order quadrature of
// the exact integrand (not the piecewise-constant interpolant).
std::vector<double> closed_form_e2_residuals(const LoadPath& path, const TimePartition& part,
                                             const Grid1D& grid, const Grid2D& hatg_grid);

enum class EvScenario { e2_plain, e1_rig, e1_reg };

struct EvRow {
  int P = 0;
  double epsilon = 0.0;
  double sup_energy_gap = 0.0;
  double sup_diss_gap = 0.0;
  double sup_penalty = 0.0;    // e1_reg only
  double mutual_margin = 0.0;  // e1_rig only: sup over knots of |transfer margin|
};

struct EvReport {
  EvScenario scenario;
  std::vector<EvRow> rows;
  Trajectory<DeformationState> limit;
  double limit_diss_sup = 0.0;  // sup over knots of the limit dissipation total
};

struct EvParams {
  double lambda = 0.5;
  int n_cells = 128;
  int n_x1 = 16;  // x1 resolution of the shear fields (e1_reg)
  double reg_bump_amplitude_scale = 1.0;
  SolverOptions opts{};
};

// Convergence experiment: evolves the fine-scale systems for every period
// count against the limit system, with loads g_eps = g0 + eps * perturbation
// (perturbation may be null).
EvReport ev_gamma_experiment(EvScenario scenario, const LoadPath& g0, const LoadPath* perturbation,
                             const std::vector<int>& P_list, const TimePartition& part,
                             const DissipationSpec& d, const EvParams& params);

}  // namespace sliphom
