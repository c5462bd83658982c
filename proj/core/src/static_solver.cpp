#include "sliphom/static_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sliphom {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

namespace detail {

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;  // tiny negatives round onto 2 pi itself
  return t;
}

double solve_cell(double a, double b, double w, double p, const Interval& box, bool cap_at_p) {
  double lo = box.lo;
  double hi = box.hi;
  if (cap_at_p) hi = std::min(hi, p);
  double g;
  if (w == 0.0) {
    g = -b / (2.0 * a);
  } else {
    const double right = (-b - w) / (2.0 * a);  // valid branch for gamma >= p
    const double left = (-b + w) / (2.0 * a);   // valid branch for gamma <= p
    if (right > p) {
      g = right;
    } else if (left < p) {
      g = left;
    } else {
      g = p;
    }
  }
  if (g < lo) g = lo;
  if (g > hi) g = hi;
  return g;
}

namespace {

struct Probe {
  double theta;
  DirectionEval eval;
};

// Golden-section refinement of a bracket [a, b] assumed to contain a local
// minimum. Tracks the best probe and the largest derivative bound seen.
Probe refine_bracket(const std::function<DirectionEval(double)>& f, double a, double b,
                     Probe best, double angle_tol, double* slack_out) {
  constexpr double kGold = 0.6180339887498949;
  double lambda_max = std::max(1.0, best.eval.lambda_norm);
  double x1 = b - kGold * (b - a);
  double x2 = a + kGold * (b - a);
  DirectionEval f1 = f(x1);
  DirectionEval f2 = f(x2);
  auto consider = [&](double th, const DirectionEval& e) {
    lambda_max = std::max(lambda_max, std::max(1.0, e.lambda_norm));
    if (e.value < best.eval.value) best = {th, e};
  };
  consider(x1, f1);
  consider(x2, f2);
  for (int it = 0; it < 300 && (b - a) * lambda_max > angle_tol; ++it) {
    if (f1.value <= f2.value) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGold * (b - a);
      f1 = f(x1);
      consider(x1, f1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGold * (b - a);
      f2 = f(x2);
      consider(x2, f2);
    }
  }
  *slack_out = (b - a) * lambda_max;
  return best;
}

}  // namespace

ScanResult direction_scan(const std::function<DirectionEval(double)>& f,
                          const SolverOptions& opts, std::optional<double> prev_theta) {
  const int n = std::max(4, opts.n_angles);
  const double step = kTwoPi / n;
  std::vector<Probe> probes(n);
  for (int i = 0; i < n; ++i) {
    const double th = opts.scan_offset + i * step;
    probes[i] = {th, f(th)};
  }
  double vmin = kInf, vmax = -kInf;
  for (const Probe& p : probes) {
    vmin = std::min(vmin, p.eval.value);
    vmax = std::max(vmax, p.eval.value);
  }
  const double tie_eps = 1e-12 * (1.0 + std::abs(vmin));

  // Flat objective: every direction is optimal; honor the tie preference.
  if (vmax - vmin <= tie_eps) {
    const double th = prev_theta ? *prev_theta : probes.front().theta;
    return {wrap_angle(th), f(th).value, vmax - vmin};
  }

  std::vector<Probe> candidates;
  double slack = 0.0;
  for (int i = 0; i < n; ++i) {
    const Probe& prev = probes[(i + n - 1) % n];
    const Probe& cur = probes[i];
    const Probe& next = probes[(i + 1) % n];
    if (cur.eval.value <= prev.eval.value && cur.eval.value <= next.eval.value) {
      double bracket_slack = 0.0;
      Probe refined = refine_bracket(f, cur.theta - step, cur.theta + step, cur, opts.angle_tol,
                                     &bracket_slack);
      candidates.push_back(refined);
      slack = std::max(slack, bracket_slack);
    }
  }
  if (prev_theta) candidates.push_back({*prev_theta, f(*prev_theta)});

  double best = kInf;
  for (const Probe& c : candidates) best = std::min(best, c.eval.value);
  const double tie = 1e-12 * (1.0 + std::abs(best));
  // Ties resolve to the previous angle when given, else to the smallest one.
  if (prev_theta) {
    for (const Probe& c : candidates) {
      if (c.theta == *prev_theta && c.eval.value <= best + tie) {
        return {wrap_angle(c.theta), c.eval.value, slack};
      }
    }
  }
  const Probe* pick = nullptr;
  for (const Probe& c : candidates) {
    if (c.eval.value > best + tie) continue;
    if (!pick || wrap_angle(c.theta) < wrap_angle(pick->theta)) pick = &c;
  }
  return {wrap_angle(pick->theta), pick->eval.value, slack};
}

double SeparableProblem::solve_direction(Vec2 d, std::vector<double>& gamma) const {
  const int m = n();
  gamma.resize(m);
  double value = -d.dot(g_hat);
  const bool has_prox = !prox_weight.empty();
  for (int i = 0; i < m; ++i) {
    const double w = has_prox ? prox_weight[i] : 0.0;
    const double p = has_prox ? prox_center[i] : 0.0;
    if (quad[i] == 0.0) {
      gamma[i] = 0.0;
      if (monotone && 0.0 > p + 1e-12) return kInf;
      value += w * std::abs(p);
      continue;
    }
    const double b = lin[i] - d.dot(lambda_coeff[i]);
    const double gi = solve_cell(quad[i], b, w, p, box, monotone);
    gamma[i] = gi;
    value += quad[i] * gi * gi + b * gi + w * std::abs(gi - p);
  }
  return value;
}

double SeparableProblem::objective(std::span<const double> gamma, Vec2 d) const {
  double value = -d.dot(g_hat);
  const bool has_prox = !prox_weight.empty();
  for (int i = 0; i < n(); ++i) {
    const double b = lin[i] - d.dot(lambda_coeff[i]);
    value += quad[i] * gamma[i] * gamma[i] + b * gamma[i];
    if (has_prox) value += prox_weight[i] * std::abs(gamma[i] - prox_center[i]);
  }
  return value;
}

Vec2 SeparableProblem::lambda_of(std::span<const double> gamma) const {
  Vec2 v = g_hat;
  for (int i = 0; i < n(); ++i) v += gamma[i] * lambda_coeff[i];
  return v;
}

SeparableProblem::Optimum SeparableProblem::minimize(const SolverOptions& opts,
                                                     std::optional<double> prev_theta) const {
  std::vector<double> scratch;
  auto eval = [&](double theta) -> DirectionEval {
    const Vec2 d = rotation_e1(theta);
    const double v = solve_direction(d, scratch);
    return {v, lambda_of(scratch).norm()};
  };
  const ScanResult scan = direction_scan(eval, opts, prev_theta);

  // Alternating polish: exact inner solve, then align the direction with the
  // resultant. Each half-step is a block minimization, so values descend.
  Vec2 d = rotation_e1(scan.theta);
  Optimum out;
  for (int it = 0; it < 500; ++it) {
    out.value = solve_direction(d, out.gamma);
    out.lambda = lambda_of(out.gamma);
    const double ln = out.lambda.norm();
    if (ln <= 1e-30) break;
    const Vec2 dn = {out.lambda.x / ln, out.lambda.y / ln};
    if ((dn - d).norm() <= 1e-13) break;
    d = dn;
  }
  out.d = d;
  out.slack = scan.slack;
  return out;
}

}  // namespace detail

namespace detail {

StoredWeights stored_weights(const SlipSystem& sl, double lambda, const Grid1D& grid) {
  const double h = grid.h();
  const double s1 = sl.s1(), s2 = sl.s2();
  return {2.0 * h * s1 * s1 / lambda, -4.0 * h * s1 * s2};
}

}  // namespace detail

namespace {

using detail::StoredWeights;
using detail::stored_weights;

detail::SeparableProblem make_static_problem(const LambdaMap& map, const SlipSystem& sl,
                                             double lambda, const Grid1D& grid) {
  detail::SeparableProblem sp;
  const StoredWeights w = stored_weights(sl, lambda, grid);
  sp.quad.assign(grid.n(), w.quad);
  sp.lin.assign(grid.n(), w.lin);
  sp.lambda_coeff = map.coeff;
  sp.g_hat = map.g_hat;
  sp.box = shear_interval(sl, lambda);
  return sp;
}

Grid2D work_grid_for(const LoadField& g, const Grid1D& grid, const Grid2D& hatg_grid) {
  if (g.is_sampled()) return g.samples().grid;
  // Align the x2 cells with the profile so the quadrature sees no kinks.
  return Grid2D(hatg_grid.nx(), grid.n());
}

}  // namespace

double energy_E(const DeformationState& q, double lambda) {
  const Interval K = shear_interval(q.slip, lambda);
  const Grid1D& grid = q.shear.grid();
  const StoredWeights w = stored_weights(q.slip, lambda, grid);
  double value = 0.0;
  for (int i = 0; i < grid.n(); ++i) {
    const double g = q.shear.gamma(i);
    if (!K.contains(g, 1e-12)) return kInf;
    value += w.quad * g * g + w.lin * g;
  }
  return value;
}

double energy_I(const DeformationState& q, const LoadField& g, double lambda,
                const Grid2D& hatg_grid) {
  const double E = energy_E(q, lambda);
  if (!std::isfinite(E)) return E;
  return E - lambda_vec(g, q.shear, hatg_grid).dot(q.rot_e1());
}

double energy_J(const ShearProfile& profile, const LoadField& g, const SlipSystem& sl,
                double lambda, const Grid2D& hatg_grid) {
  const Interval K = shear_interval(sl, lambda);
  const StoredWeights w = stored_weights(sl, lambda, profile.grid());
  double value = 0.0;
  for (int i = 0; i < profile.n(); ++i) {
    const double gi = profile.gamma(i);
    if (!K.contains(gi, 1e-12)) return kInf;
    value += w.quad * gi * gi + w.lin * gi;
  }
  return value - lambda_vec(g, profile, hatg_grid).norm();
}

ShearProfile inner_minimize(Vec2 d, const LoadField& g, const SlipSystem& sl, double lambda,
                            const Grid1D& grid) {
  if (std::abs(d.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("inner_minimize: direction must be a unit vector");
  }
  if (sl.is_e2_axis()) return ShearProfile::zero(grid);
  LambdaMap map;  // g_hat is irrelevant for the argmin
  map.coeff = lambda_coefficients(g, grid);
  detail::SeparableProblem sp = make_static_problem(map, sl, lambda, grid);
  std::vector<double> gamma;
  sp.solve_direction(d, gamma);
  return ShearProfile(grid, std::move(gamma));
}

StaticSolution minimize_I(const LoadField& g, const SlipSystem& sl, double lambda,
                          const Grid1D& grid, const Grid2D& hatg_grid,
                          const SolverOptions& opts) {
  const LambdaMap map = assemble_lambda_map(g, grid, hatg_grid);
  const double tol = opts.tol_lambda(map.g_hat.norm());

  ShearProfile profile = ShearProfile::zero(grid);
  Vec2 lam;
  double value_J;
  double theta;

  if (sl.is_e2_axis()) {
    lam = map.g_hat;
    value_J = -lam.norm();
    theta = lam.norm() > tol ? std::atan2(lam.y, lam.x) : 0.0;
  } else {
    const detail::SeparableProblem sp = make_static_problem(map, sl, lambda, grid);
    const auto opt = sp.minimize(opts);
    profile = ShearProfile(grid, opt.gamma);
    lam = opt.lambda;
    value_J = opt.value + opt.d.dot(lam) - lam.norm();
    theta = lam.norm() > tol ? std::atan2(opt.d.y, opt.d.x) : 0.0;
  }

  DeformationState state{detail::wrap_angle(theta), profile, sl};
  const double work = work_direct(g, state, work_grid_for(g, grid, hatg_grid));
  StaticSolution sol{state, energy_E(state, lambda) - work, value_J, lam,
                     lam.norm() > tol ? RotationMultiplicity::unique : RotationMultiplicity::free};
  return sol;
}

double el_residual(const StaticSolution& sol, const LoadField& g, double lambda,
                   const Grid2D& hatg_grid) {
  if (!sol.state.slip.is_e1_axis()) {
    throw std::invalid_argument("el_residual: only supported for slip along e1");
  }
  const ShearProfile& profile = sol.state.shear;
  const Grid1D& grid = profile.grid();
  const double h = grid.h();
  const double tol = SolverOptions{}.tol_lambda(hat_g(g, hatg_grid).norm());

  if (sol.lambda_at_opt.norm() <= tol) {
    // Vanishing resultant forces Gamma = 0; report its L2 norm.
    double acc = 0.0;
    for (int i = 0; i < grid.n(); ++i) {
      for (int which = 0; which < 2; ++which) {
        const double x2 = grid.gauss(i, which);
        const double G = profile.value_at(x2);
        acc += 0.5 * h * G * G;
      }
    }
    return std::sqrt(acc);
  }

  const Vec2 dir = sol.lambda_at_opt.normalized();
  // Mean of the marginal over (-1,1): per-cell Gauss of the marginal.
  Vec2 mean{0.0, 0.0};
  const Marginal m = marginal_x1(g, grid);
  for (int i = 0; i < grid.n(); ++i) {
    mean += (0.5 * h) * (m.gauss(i, 0) + m.gauss(i, 1));
  }
  mean = 0.5 * mean;

  double acc = 0.0;
  for (int i = 1; i < grid.n(); ++i) {
    const double second =
        (profile.node_value(i + 1) - 2.0 * profile.node_value(i) + profile.node_value(i - 1)) /
        (h * h);
    const Vec2 m0 = marginal_x1_at(g, grid.node(i)) - mean;
    const double r = second + 0.25 * lambda * dir.dot(m0);
    acc += h * r * r;
  }
  return std::sqrt(acc);
}

AffineReduced minimize_affine_reduced(const Mat2& A, Vec2 b, double lambda,
                                      const SolverOptions& opts) {
  (void)b;  // constants do not enter the reduced problem
  const Vec2 w = A.col(0) - A.col(1).perp();
  const Vec2 v = A.col(1);

  struct Point {
    double alpha, gamma, value;
    Vec2 lambda_vec;
  };
  auto solve_for = [&](Vec2 d) -> Point {
    const double k = (4.0 / 3.0) * d.dot(v);
    const double alpha = -k * lambda / 16.0;
    const double gamma = 3.0 * k * lambda / 16.0;
    const double rho = 0.6 * alpha + gamma;
    const double Q = (4.0 / lambda) * (1.8 * alpha * alpha + gamma * gamma + 2.0 * alpha * gamma);
    const Vec2 lam = (4.0 / 3.0) * (w + rho * v);
    return {alpha, gamma, Q - (4.0 / 3.0) * d.dot(w) - k * rho, lam};
  };

  auto eval = [&](double theta) -> detail::DirectionEval {
    const Point p = solve_for(rotation_e1(theta));
    return {p.value, p.lambda_vec.norm()};
  };
  const detail::ScanResult scan = detail::direction_scan(eval, opts);

  Vec2 d = rotation_e1(scan.theta);
  Point p = solve_for(d);
  for (int it = 0; it < 500; ++it) {
    const double ln = p.lambda_vec.norm();
    if (ln <= 1e-30) break;
    const Vec2 dn = {p.lambda_vec.x / ln, p.lambda_vec.y / ln};
    if ((dn - d).norm() <= 1e-13) break;
    d = dn;
    p = solve_for(d);
  }
  return {p.alpha, p.gamma, p.value, p.lambda_vec};
}

UniquenessReport uniqueness_probe(const LoadField& g, const SlipSystem& sl, double lambda,
                                  const Grid1D& grid, const Grid2D& hatg_grid, int n_starts,
                                  const SolverOptions& opts) {
  if (n_starts < 1) throw std::invalid_argument("uniqueness_probe: n_starts must be >= 1");
  std::vector<StaticSolution> runs;
  runs.reserve(n_starts);
  for (int k = 0; k < n_starts; ++k) {
    SolverOptions o = opts;
    o.scan_offset = opts.scan_offset + (kTwoPi / opts.n_angles) * (static_cast<double>(k) / n_starts);
    runs.push_back(minimize_I(g, sl, lambda, grid, hatg_grid, o));
  }
  double gamma_spread = 0.0;
  double value_spread = 0.0;
  const StaticSolution* best = &runs.front();
  for (const StaticSolution& r : runs) {
    if (r.value_J < best->value_J) best = &r;
  }
  for (const StaticSolution& r : runs) {
    for (int i = 0; i < grid.n(); ++i) {
      gamma_spread = std::max(gamma_spread,
                              std::abs(r.state.shear.gamma(i) - best->state.shear.gamma(i)));
    }
    value_spread = std::max(value_spread, std::abs(r.value_J - best->value_J));
  }
  const double tol = opts.tol_lambda(hat_g(g, hatg_grid).norm());
  bool any_free = false;
  for (const StaticSolution& r : runs) {
    if (r.lambda_at_opt.norm() <= tol) any_free = true;
  }
  // With a vanishing resultant the shear is pinned; disagreement across the
  // starts would contradict the uniqueness argument.
  if (any_free && gamma_spread > 1e-8) {
    throw std::logic_error("uniqueness_probe: free rotation with non-unique shear, spread " +
                           std::to_string(gamma_spread));
  }
  return {gamma_spread <= 1e-8, best->lambda_at_opt.norm() > tol, gamma_spread, value_spread,
          n_starts};
}

}  // namespace sliphom
