#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sliphom/loads.hpp"

namespace sliphom {

struct SolverOptions {
  int n_angles = 64;
  double angle_tol = 1e-10;
  double scan_offset = 0.0;
  // Rotation is declared free below tol_lambda_scale * (1 + |g_hat|).
  double tol_lambda_scale = 1e-9;

  double tol_lambda(double g_hat_norm) const { return tol_lambda_scale * (1.0 + g_hat_norm); }
};

enum class RotationMultiplicity { unique, free };

struct StaticSolution {
  DeformationState state;
  double value_I;            // energy by direct quadrature of the work term
  double value_J;            // reduced functional at the optimal profile
  Vec2 lambda_at_opt;
  RotationMultiplicity multiplicity;
};

// Stored energy of the homogenized model:
//   (s1^2/lambda) * integral gamma^2  -  2 s1 s2 * integral gamma
// over the square; +infinity when some cell violates the shear interval.
double energy_E(const DeformationState& q, double lambda);

// energy_E minus the work of g, the latter through the resultant identity.
double energy_I(const DeformationState& q, const LoadField& g, double lambda,
                const Grid2D& hatg_grid);

// Reduced functional on profiles: stored part minus |Lambda(g, Gamma)|.
double energy_J(const ShearProfile& profile, const LoadField& g, const SlipSystem& sl,
                double lambda, const Grid2D& hatg_grid);

// For a fixed unit direction d, the minimizer over admissible profiles of
//   stored part - d . Lambda(g, Gamma)
// is per-cell explicit: the clip of a closed-form stationary point.
ShearProfile inner_minimize(Vec2 d, const LoadField& g, const SlipSystem& sl, double lambda,
                            const Grid1D& grid);

// Global minimization of the loaded functional: scan of the rotation
// direction with closed-form inner solves, golden-section refinement of the
// bracketed minima, then alternating polish.
StaticSolution minimize_I(const LoadField& g, const SlipSystem& sl, double lambda,
                          const Grid1D& grid, const Grid2D& hatg_grid,
                          const SolverOptions& opts = {});

// Discrete stationarity residual of a solution for slip along e1. When the
// resultant is nonzero this is the L2 norm of
//   Gamma'' + (lambda/4) * Lambda_bar . ( [g]_{x1} - (1/2) integral [g]_{x1} )
// over interior nodes (second differences of node values); when the
// resultant vanishes it is ||Gamma||_{L2}, which must be zero at optima.
double el_residual(const StaticSolution& sol, const LoadField& g, double lambda,
                   const Grid2D& hatg_grid);

// Closed-form reduction for affine loads and slip e1: the optimal profile is
// a cubic alpha*x2^3 + gamma*x2 and the value solves a two-dimensional
// problem, handled by the same direction scan with exact 2x2 inner solves.
struct AffineReduced {
  double alpha;
  double gamma;
  double value;
  Vec2 lambda_at_opt;
};
AffineReduced minimize_affine_reduced(const Mat2& A, Vec2 b, double lambda,
                                      const SolverOptions& opts = {});

struct UniquenessReport {
  bool shear_unique;
  bool rotation_unique;
  double gamma_spread;   // max over starts of ||gamma - gamma_ref||_inf
  double value_spread;
  int n_starts;
};

// Multistart probe: re-runs the minimization with perturbed scan offsets and
// reports which of rotation / shear is pinned across the found minimizers.
UniquenessReport uniqueness_probe(const LoadField& g, const SlipSystem& sl, double lambda,
                                  const Grid1D& grid, const Grid2D& hatg_grid, int n_starts,
                                  const SolverOptions& opts = {});

namespace detail {

// min over gamma in [lo, hi] (optionally also gamma <= p) of
//   a gamma^2 + b gamma + w |gamma - p|        (a > 0, w >= 0)
double solve_cell(double a, double b, double w, double p, const Interval& box, bool cap_at_p);

// Per-cell weights of the stored energy over the square: the integral is
// sum_i quad * gamma_i^2 + lin * gamma_i.
struct StoredWeights {
  double quad;
  double lin;
};
StoredWeights stored_weights(const SlipSystem& sl, double lambda, const Grid1D& grid);

struct DirectionEval {
  double value;
  double lambda_norm;
};

struct ScanResult {
  double theta;
  double value;
  double slack;  // bound on the remaining gap of the direction search
};

// Minimize a continuous objective over the direction angle. The objective's
// derivative is bounded by the reported lambda_norm (envelope bound), which
// drives both the refinement target and the slack bound. Evaluates
// prev_theta as an extra candidate and keeps it on ties.
ScanResult direction_scan(const std::function<DirectionEval(double)>& f,
                          const SolverOptions& opts,
                          std::optional<double> prev_theta = std::nullopt);

// Shared per-cell data of a separable direction solve.
struct SeparableProblem {
  std::vector<double> quad;        // a_i; cells with a_i == 0 are frozen at 0
  std::vector<double> lin;         // b_i before the direction term
  std::vector<Vec2> lambda_coeff;  // Lambda = g_hat + sum coeff_i gamma_i
  Vec2 g_hat;
  Interval box = Interval::all();
  // Optional L1 proximal term w_i |gamma_i - p_i| with monotone cap.
  std::vector<double> prox_weight;
  std::vector<double> prox_center;
  bool monotone = false;

  int n() const { return static_cast<int>(quad.size()); }
  // Minimizes over gamma for fixed direction d; returns the objective value
  // (including -d.g_hat) and fills gamma.
  double solve_direction(Vec2 d, std::vector<double>& gamma) const;
  double objective(std::span<const double> gamma, Vec2 d) const;
  Vec2 lambda_of(std::span<const double> gamma) const;

  // Scan + alternating polish; returns the optimal direction, profile and a
  // slack bound for the angle search.
  struct Optimum {
    Vec2 d;
    std::vector<double> gamma;
    double value;
    Vec2 lambda;
    double slack;
  };
  Optimum minimize(const SolverOptions& opts, std::optional<double> prev_theta = std::nullopt) const;
};

double wrap_angle(double theta);  // into [0, 2 pi)

}  // namespace detail

}  // namespace sliphom
