#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sliphom::checks {

namespace {
constexpr double kInvSqrt3 = 0.57735026918962576451;
}

double quad2d(const std::function<double(double, double)>& f, int nx, int ny) {
  const double hx = 2.0 / nx, hy = 2.0 / ny;
  const double w = 0.25 * hx * hy;
  double acc = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double cx = -1.0 + (i + 0.5) * hx;
    for (int j = 0; j < ny; ++j) {
      const double cy = -1.0 + (j + 0.5) * hy;
      for (int a = -1; a <= 1; a += 2) {
        for (int b = -1; b <= 1; b += 2) {
          acc += w * f(cx + a * 0.5 * hx * kInvSqrt3, cy + b * 0.5 * hy * kInvSqrt3);
        }
      }
    }
  }
  return acc;
}

Vec2 quad2d_vec(const std::function<Vec2(double, double)>& f, int nx, int ny) {
  return {quad2d([&](double x, double y) { return f(x, y).x; }, nx, ny),
          quad2d([&](double x, double y) { return f(x, y).y; }, nx, ny)};
}

Vec2 lambda_by_quadrature(const LoadField& g, const ShearProfile& profile, int nx, int ny) {
  auto hat = quad2d_vec(
      [&](double x, double y) {
        const Vec2 gv = g.eval({x, y});
        return x * gv - y * gv.perp();
      },
      nx, ny);
  auto coupling = quad2d_vec(
      [&](double x, double y) { return profile.value_at(y) * g.eval({x, y}); }, nx, ny);
  return hat + coupling;
}

namespace {

struct CellCandidates {
  std::vector<double> values;
};

// Per-cell candidate grids for the tuple enumerations: a uniform grid on
// [lo, hi] intersected with the box, plus the exact box endpoints and any
// extra anchors (previous-state values).
std::vector<CellCandidates> build_candidates(const Grid1D& grid, const Interval& box, double lo,
                                             double hi, int n_per_cell,
                                             const std::vector<double>* anchors, bool cap_at_anchor,
                                             double* max_spacing) {
  const double a = std::max(lo, box.lo);
  const double b = std::min(hi, box.hi);
  if (!(a <= b)) throw std::invalid_argument("brute force: empty candidate range");
  *max_spacing = (n_per_cell > 1) ? (b - a) / (n_per_cell - 1) : 0.0;
  std::vector<CellCandidates> cells(grid.n());
  for (int i = 0; i < grid.n(); ++i) {
    auto& v = cells[i].values;
    for (int k = 0; k < n_per_cell; ++k) {
      v.push_back(n_per_cell > 1 ? a + (b - a) * k / (n_per_cell - 1) : a);
    }
    if (box.lo > -1e300) v.push_back(box.lo);
    if (box.hi < 1e300) v.push_back(box.hi);
    if (anchors) v.push_back((*anchors)[i]);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (cap_at_anchor && anchors) {
      const double cap = (*anchors)[i];
      std::erase_if(v, [cap](double x) { return x > cap + 1e-15; });
      if (v.empty()) v.push_back(cap);
    }
  }
  return cells;
}

struct TupleProblem {
  std::vector<double> quad;       // a_i
  std::vector<double> lin;        // b_i (without the resultant coupling)
  std::vector<Vec2> coeff;        // Lambda coefficients
  Vec2 g_hat;
  std::vector<double> prox_w;     // empty if unused
  std::vector<double> prox_p;
};

// Depth-first enumeration carrying the running stored value and resultant.
void enumerate(const TupleProblem& pb, const std::vector<CellCandidates>& cells, size_t i,
               double stored, Vec2 lam, std::vector<double>& current, double* best_value,
               std::vector<double>* best_gamma) {
  if (i == cells.size()) {
    const double value = stored - lam.norm();
    if (value < *best_value) {
      *best_value = value;
      *best_gamma = current;
    }
    return;
  }
  for (double g : cells[i].values) {
    double s = stored + pb.quad[i] * g * g + pb.lin[i] * g;
    if (!pb.prox_w.empty()) s += pb.prox_w[i] * std::abs(g - pb.prox_p[i]);
    current[i] = g;
    enumerate(pb, cells, i + 1, s, lam + g * pb.coeff[i], current, best_value, best_gamma);
  }
}

TupleOracle run_enumeration(const TupleProblem& pb, const std::vector<CellCandidates>& cells,
                            double spacing) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> gamma(cells.size(), 0.0), current(cells.size(), 0.0);
  enumerate(pb, cells, 0, 0.0, pb.g_hat, current, &best, &gamma);
  // Gap bound: at the exact minimizer every cell is either at a candidate
  // anchor (box endpoint, kink) or an interior stationary point, where the
  // one-cell perturbation to the nearest grid candidate costs at most
  // a_i * (spacing/2)^2.
  double bound = 0.0;
  for (double a : pb.quad) bound += a * 0.25 * spacing * spacing;
  return {best, gamma, bound};
}

TupleProblem make_problem(const LoadField& g, const SlipSystem& sl, double lambda,
                          const Grid1D& grid) {
  TupleProblem pb;
  const double h = grid.h();
  pb.quad.assign(grid.n(), 2.0 * h * sl.s1() * sl.s1() / lambda);
  pb.lin.assign(grid.n(), -4.0 * h * sl.s1() * sl.s2());
  pb.coeff = lambda_coefficients(g, grid);
  pb.g_hat = hat_g(g, Grid2D(16, 16));
  return pb;
}

}  // namespace

TupleOracle brute_force_static(const LoadField& g, const SlipSystem& sl, double lambda,
                               const Grid1D& grid, double lo, double hi, int n_per_cell) {
  const TupleProblem pb = make_problem(g, sl, lambda, grid);
  double spacing = 0.0;
  const auto cells = build_candidates(grid, shear_interval(sl, lambda), lo, hi, n_per_cell,
                                      nullptr, false, &spacing);
  return run_enumeration(pb, cells, spacing);
}

TupleOracle brute_force_incremental(const LoadField& g, const SlipSystem& sl, double lambda,
                                    const Grid1D& grid, const DissipationSpec& d,
                                    const std::vector<double>& prev, double lo, double hi,
                                    int n_per_cell) {
  TupleProblem pb = make_problem(g, sl, lambda, grid);
  pb.prox_w.assign(grid.n(), d.delta * 2.0 * grid.h());
  pb.prox_p = prev;
  double spacing = 0.0;
  const bool cap = (d.kind == DissipationKind::monotone);
  const auto cells = build_candidates(grid, shear_interval(sl, lambda), lo, hi, n_per_cell, &prev,
                                      cap, &spacing);
  return run_enumeration(pb, cells, spacing);
}

GridOracle2D brute_force_reduced(const Mat2& A, double lambda, double lo, double hi, double step) {
  const Vec2 w = A.col(0) - A.col(1).perp();
  const Vec2 v = A.col(1);
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  GridOracle2D best{0.0, 0.0, std::numeric_limits<double>::infinity(), 0.0};
  for (int i = 0; i <= n; ++i) {
    const double alpha = lo + i * step;
    for (int j = 0; j <= n; ++j) {
      const double gamma = lo + j * step;
      const double rho = 0.6 * alpha + gamma;
      const double Q =
          (4.0 / lambda) * (1.8 * alpha * alpha + gamma * gamma + 2.0 * alpha * gamma);
      const double value = Q - (4.0 / 3.0) * (w + rho * v).norm();
      if (value < best.value) best = {alpha, gamma, value, 0.0};
    }
  }
  // Largest eigenvalue of the quadratic form's Hessian bounds the loss of
  // snapping the exact minimizer to the grid.
  const double c = 4.0 / lambda;
  const double tr = c * (2.0 * 1.8 + 2.0);
  const double det = c * c * (2.0 * 1.8 * 2.0 - 2.0 * 2.0);
  const double lam_max = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
  best.quantization_bound = lam_max * 0.5 * step * step;
  return best;
}

double brute_force_scalar(const std::function<double(double)>& f, double lo, double hi,
                          double step, double* argmin) {
  double best = std::numeric_limits<double>::infinity();
  double arg = lo;
  const long long n = std::llround((hi - lo) / step);
  for (long long i = 0; i <= n; ++i) {
    const double x = lo + i * step;
    const double v = f(x);
    if (v < best) {
      best = v;
      arg = x;
    }
  }
  if (argmin) *argmin = arg;
  return best;
}

double cubic_fit_residual(const ShearProfile& profile, double* alpha, double* gamma) {
  // Normal equations for the two-parameter fit at the grid nodes.
  const Grid1D& grid = profile.grid();
  double s33 = 0.0, s31 = 0.0, s11 = 0.0, b3 = 0.0, b1 = 0.0;
  for (int i = 0; i <= grid.n(); ++i) {
    const double x = grid.node(i);
    const double x3 = x * x * x;
    const double G = profile.node_value(i);
    s33 += x3 * x3;
    s31 += x3 * x;
    s11 += x * x;
    b3 += x3 * G;
    b1 += x * G;
  }
  const double det = s33 * s11 - s31 * s31;
  const double a = (b3 * s11 - b1 * s31) / det;
  const double c = (s33 * b1 - s31 * b3) / det;
  if (alpha) *alpha = a;
  if (gamma) *gamma = c;
  double acc = 0.0;
  for (int i = 0; i <= grid.n(); ++i) {
    const double x = grid.node(i);
    const double r = profile.node_value(i) - (a * x * x * x + c * x);
    acc += grid.h() * r * r;
  }
  return std::sqrt(acc);
}

}  // namespace sliphom::checks
