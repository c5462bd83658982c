#pragma once

#include <functional>
#include <vector>

#include "sliphom/dissipation.hpp"
#include "sliphom/loads.hpp"
#include "sliphom/static_solver.hpp"

// Independent reference computations used by the property suites and the
// acceptance checks. Everything here recomputes results from first
// principles (direct quadrature, exhaustive enumeration) rather than going
// through the solver code paths it is meant to check.
namespace sliphom::checks {

// Tensor-product Gauss-Legendre quadrature over (-1,1)^2 with locally
// computed nodes (two points per cell and axis).
double quad2d(const std::function<double(double, double)>& f, int nx, int ny);
Vec2 quad2d_vec(const std::function<Vec2(double, double)>& f, int nx, int ny);

// Lambda(g, Gamma) by direct two-dimensional quadrature of the defining
// integrals (no marginal reduction).
Vec2 lambda_by_quadrature(const LoadField& g, const ShearProfile& profile, int nx, int ny);

struct TupleOracle {
  double value;
  std::vector<double> gamma;
  double quantization_bound;  // valid gap bound between oracle and exact minimum
};

// Exhaustive minimization of the reduced static functional over per-cell
// quantized shear tuples: quadratic/linear stored part minus |Lambda|.
// The candidate grid spans [lo, hi] (intersected with the shear interval,
// whose endpoints are included as exact candidates).
TupleOracle brute_force_static(const LoadField& g, const SlipSystem& sl, double lambda,
                               const Grid1D& grid, double lo, double hi, int n_per_cell);

// Same enumeration for one incremental problem: adds the dissipation term
// w |gamma - prev| per cell (previous values are exact candidates) and the
// monotone cap when requested.
TupleOracle brute_force_incremental(const LoadField& g, const SlipSystem& sl, double lambda,
                                    const Grid1D& grid, const DissipationSpec& d,
                                    const std::vector<double>& prev, double lo, double hi,
                                    int n_per_cell);

struct GridOracle2D {
  double alpha;
  double gamma;
  double value;
  double quantization_bound;
};

// Dense-grid minimization of the two-parameter cubic-profile reduction for
// affine loads and slip e1.
GridOracle2D brute_force_reduced(const Mat2& A, double lambda, double lo, double hi, double step);

// Dense scan of a scalar function on [lo, hi].
double brute_force_scalar(const std::function<double(double)>& f, double lo, double hi,
                          double step, double* argmin = nullptr);

// Least-squares fit of profile node values to alpha*x^3 + gamma*x; returns
// the L2 norm of the fit residual.
double cubic_fit_residual(const ShearProfile& profile, double* alpha = nullptr,
                          double* gamma = nullptr);

}  // namespace sliphom::checks
