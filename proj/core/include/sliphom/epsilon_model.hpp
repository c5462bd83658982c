#pragma once

#include <optional>
#include <vector>

#include "sliphom/dissipation.hpp"
#include "sliphom/static_solver.hpp"

namespace sliphom {

// Shear coefficient on a microstructure-aligned grid, vanishing on every
// rigid cell.
struct EpsShearProfile {
  Grid1D grid;
  Microstructure ms;
  std::vector<bool> mask;    // true = soft cell
  std::vector<double> gamma; // zero on rigid cells

  static EpsShearProfile zero(const Microstructure& ms, const Grid1D& grid);
  // Zero-mean potential of the masked coefficient.
  ShearProfile to_profile() const;
  void validate() const;  // throws when gamma is nonzero on a rigid cell
};

// Laminate state with a single global rotation.
struct EpsState {
  double theta;
  EpsShearProfile shear;

  Vec2 rot_e1() const { return rotation_e1(theta); }
  DeformationState to_state(const SlipSystem& sl) const {
    return {theta, shear.to_profile(), sl};
  }
};

// Fine-scale stored energy: integral of gamma^2 over the soft layers, minus
// (when a load is given) the work of g through the resultant identity.
// Nonzero shear on a rigid cell yields +infinity.
double energy_eps(const EpsState& q, const LoadField* g, const Grid2D* hatg_grid);

// Laminate realizing a limit profile: gamma_eps = gamma / lambda on soft
// cells, zero on rigid ones, same rotation. For per-period-constant limit
// profiles the stored energies agree exactly.
EpsState recovery_e1(const ShearProfile& limit, const Microstructure& ms, double theta);

// Quadratic-trick transfer of a limit-state update onto a laminate state:
// gamma_tilde_eps = gamma_eps + (gamma_tilde - gamma)/lambda on soft cells.
// Reports both sides of the stability-transfer inequality.
struct MutualRecovery {
  EpsState recovered;
  double lhs;     // fine-scale energy increment plus dissipation
  double rhs;     // limit-side energy increment plus dissipation
  double margin;  // rhs - lhs
  double diss_eps;
  double diss_limit;
};

MutualRecovery mutual_recovery_e1(const EpsState& base, const DeformationState& limit_prev,
                                  const DeformationState& limit_target, const DissipationSpec& d,
                                  const LoadField* g, double lambda, const Grid2D* hatg_grid);

// Shear field with x1 dependence, zero on rigid rows; only used by the
// penalized energy and its recovery construction.
struct EpsShearField2D {
  Grid2D grid;
  Microstructure ms;
  std::vector<bool> row_mask;  // per x2 row
  std::vector<double> gamma;   // nx * ny, index ix * ny + iy

  static EpsShearField2D zero(const Microstructure& ms, const Grid2D& grid);
  double& at(int ix, int iy) { return gamma[ix * grid.ny() + iy]; }
  double at(int ix, int iy) const { return gamma[ix * grid.ny() + iy]; }
  // Row averages (1/2) integral over x1, as a profile on the x2 grid.
  ShearProfile x1_average() const;
  void validate() const;
};

// Per-cell x1-derivative by forward differences (last column backward), the
// planar incompatibility density of the shear field.
std::vector<double> dislocation_density(const EpsShearField2D& f);

// Squared L2 norm of the incompatibility density.
double reg_penalty_norm2(const EpsShearField2D& f);

// Penalized fine-scale energy: integral of gamma^2 minus the work of g
// against the x1-averaged profile, plus tau * ||d1 gamma||^2.
double energy_eps_reg(const EpsShearField2D& f, double theta, const LoadField* g, double tau,
                      const Grid2D* hatg_grid);

// x1-independent transfer field: row average of the base plus the amplified
// limit update on soft rows. Its penalty term vanishes identically.
EpsShearField2D reg_recovery(const EpsShearField2D& base, const ShearProfile& target,
                             const ShearProfile& limit_prev);

// Minimum of the fine-scale energy over laminate states with slip along e1
// (free shear on soft cells, constant rotation).
StaticSolution minimize_eps_rig(const LoadField& g, const Microstructure& ms, const Grid1D& grid,
                                const Grid2D& hatg_grid, const SolverOptions& opts = {});

struct SweepRow {
  int P;
  double epsilon;
  double min_eps;
  double limit_min;
  double gap;           // min_eps - limit_min
  double recovery_gap;  // fine-scale energy of the recovered limit minimizer, minus limit_min
};

// Homogenization sweep: fine-scale minima against the homogenized minimum
// for a list of period counts. Slip must be e1 or e2.
std::vector<SweepRow> static_gamma_sweep(const LoadField& g, const SlipSystem& sl, double lambda,
                                         const std::vector<int>& P_list, const Grid1D& grid,
                                         const Grid2D& hatg_grid, const SolverOptions& opts = {});

}  // namespace sliphom
