#include "sliphom/epsilon_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sliphom {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

EpsShearProfile EpsShearProfile::zero(const Microstructure& ms, const Grid1D& grid) {
  return {grid, ms, soft_mask(ms, grid), std::vector<double>(grid.n(), 0.0)};
}

ShearProfile EpsShearProfile::to_profile() const {
  std::vector<double> g(gamma.size());
  for (size_t i = 0; i < gamma.size(); ++i) g[i] = mask[i] ? gamma[i] : 0.0;
  return ShearProfile(grid, std::move(g));
}

void EpsShearProfile::validate() const {
  if (static_cast<int>(gamma.size()) != grid.n() || gamma.size() != mask.size()) {
    throw std::invalid_argument("EpsShearProfile: size mismatch");
  }
  for (size_t i = 0; i < gamma.size(); ++i) {
    if (!mask[i] && gamma[i] != 0.0) {
      throw std::invalid_argument("EpsShearProfile: nonzero shear on a rigid cell");
    }
  }
}

double energy_eps(const EpsState& q, const LoadField* g, const Grid2D* hatg_grid) {
  const Grid1D& grid = q.shear.grid;
  for (int i = 0; i < grid.n(); ++i) {
    if (!q.shear.mask[i] && q.shear.gamma[i] != 0.0) return kInf;
  }
  double stored = 0.0;
  const double cell = 2.0 * grid.h();  // per-cell measure in the square
  for (int i = 0; i < grid.n(); ++i) {
    if (q.shear.mask[i]) stored += cell * q.shear.gamma[i] * q.shear.gamma[i];
  }
  if (g == nullptr) return stored;
  if (hatg_grid == nullptr) throw std::invalid_argument("energy_eps: missing quadrature grid");
  return stored - lambda_vec(*g, q.shear.to_profile(), *hatg_grid).dot(q.rot_e1());
}

EpsState recovery_e1(const ShearProfile& limit, const Microstructure& ms, double theta) {
  const Grid1D& grid = limit.grid();
  EpsShearProfile shear{grid, ms, soft_mask(ms, grid), std::vector<double>(grid.n(), 0.0)};
  for (int i = 0; i < grid.n(); ++i) {
    if (shear.mask[i]) shear.gamma[i] = limit.gamma(i) / ms.lambda;
  }
  return {theta, shear};
}

MutualRecovery mutual_recovery_e1(const EpsState& base, const DeformationState& limit_prev,
                                  const DeformationState& limit_target, const DissipationSpec& d,
                                  const LoadField* g, double lambda, const Grid2D* hatg_grid) {
  const Grid1D& grid = base.shear.grid;
  if (grid.n() != limit_prev.shear.grid().n() || grid.n() != limit_target.shear.grid().n()) {
    throw std::invalid_argument("mutual_recovery_e1: profiles live on different grids");
  }
  EpsState recovered{limit_target.theta, base.shear};
  for (int i = 0; i < grid.n(); ++i) {
    if (base.shear.mask[i]) {
      recovered.shear.gamma[i] +=
          (limit_target.shear.gamma(i) - limit_prev.shear.gamma(i)) / base.shear.ms.lambda;
    }
  }

  const double cell = 2.0 * grid.h();
  const double e_eps_prev = energy_eps(base, g, hatg_grid);
  const double e_eps_next = energy_eps(recovered, g, hatg_grid);
  const double diss_eps = dissipation_cells(d, base.shear.gamma, recovered.shear.gamma, cell);

  const double e0_prev = g ? energy_I(limit_prev, *g, lambda, *hatg_grid)
                           : energy_E(limit_prev, lambda);
  const double e0_next = g ? energy_I(limit_target, *g, lambda, *hatg_grid)
                           : energy_E(limit_target, lambda);
  const double diss_limit =
      dissipation_cells(d, limit_prev.shear.gamma(), limit_target.shear.gamma(), cell);

  const double lhs = e_eps_next - e_eps_prev + diss_eps;
  const double rhs = e0_next - e0_prev + diss_limit;
  return {recovered, lhs, rhs, rhs - lhs, diss_eps, diss_limit};
}

EpsShearField2D EpsShearField2D::zero(const Microstructure& ms, const Grid2D& grid) {
  return {grid, ms, soft_mask(ms, grid.x2_grid()),
          std::vector<double>(static_cast<size_t>(grid.nx()) * grid.ny(), 0.0)};
}

ShearProfile EpsShearField2D::x1_average() const {
  const int nx = grid.nx(), ny = grid.ny();
  std::vector<double> avg(ny, 0.0);
  const double w = 0.5 * grid.hx();
  for (int iy = 0; iy < ny; ++iy) {
    double acc = 0.0;
    for (int ix = 0; ix < nx; ++ix) acc += at(ix, iy);
    avg[iy] = w * acc;
  }
  return ShearProfile(grid.x2_grid(), std::move(avg));
}

void EpsShearField2D::validate() const {
  if (static_cast<int>(gamma.size()) != grid.nx() * grid.ny()) {
    throw std::invalid_argument("EpsShearField2D: size mismatch");
  }
  for (int ix = 0; ix < grid.nx(); ++ix)
    for (int iy = 0; iy < grid.ny(); ++iy)
      if (!row_mask[iy] && at(ix, iy) != 0.0) {
        throw std::invalid_argument("EpsShearField2D: nonzero shear on a rigid row");
      }
}

std::vector<double> dislocation_density(const EpsShearField2D& f) {
  const int nx = f.grid.nx(), ny = f.grid.ny();
  if (nx < 2) throw std::invalid_argument("dislocation_density: need at least two x1 cells");
  std::vector<double> d(static_cast<size_t>(nx) * ny, 0.0);
  const double hx = f.grid.hx();
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int left = (ix < nx - 1) ? ix : nx - 2;
      d[ix * ny + iy] = (f.at(left + 1, iy) - f.at(left, iy)) / hx;
    }
  }
  return d;
}

double reg_penalty_norm2(const EpsShearField2D& f) {
  const std::vector<double> d = dislocation_density(f);
  const double cell = f.grid.hx() * f.grid.hy();
  double acc = 0.0;
  for (double v : d) acc += cell * v * v;
  return acc;
}

double energy_eps_reg(const EpsShearField2D& f, double theta, const LoadField* g, double tau,
                      const Grid2D* hatg_grid) {
  const double cell = f.grid.hx() * f.grid.hy();
  double stored = 0.0;
  for (double v : f.gamma) stored += cell * v * v;
  double work = 0.0;
  if (g != nullptr) {
    if (hatg_grid == nullptr) throw std::invalid_argument("energy_eps_reg: missing grid");
    work = lambda_vec(*g, f.x1_average(), *hatg_grid).dot(rotation_e1(theta));
  }
  return stored - work + tau * reg_penalty_norm2(f);
}

EpsShearField2D reg_recovery(const EpsShearField2D& base, const ShearProfile& target,
                             const ShearProfile& limit_prev) {
  const int ny = base.grid.ny();
  if (target.grid().n() != ny || limit_prev.grid().n() != ny) {
    throw std::invalid_argument("reg_recovery: profiles must live on the field's x2 grid");
  }
  const ShearProfile avg = base.x1_average();
  EpsShearField2D out = base;
  for (int iy = 0; iy < ny; ++iy) {
    double v = avg.gamma(iy);
    if (base.row_mask[iy]) {
      v += (target.gamma(iy) - limit_prev.gamma(iy)) / base.ms.lambda;
    }
    for (int ix = 0; ix < base.grid.nx(); ++ix) out.at(ix, iy) = base.row_mask[iy] ? v : 0.0;
  }
  return out;
}

StaticSolution minimize_eps_rig(const LoadField& g, const Microstructure& ms, const Grid1D& grid,
                                const Grid2D& hatg_grid, const SolverOptions& opts) {
  const std::vector<bool> mask = soft_mask(ms, grid);
  const LambdaMap map = assemble_lambda_map(g, grid, hatg_grid);

  detail::SeparableProblem sp;
  const double cell = 2.0 * grid.h();
  sp.quad.assign(grid.n(), 0.0);
  sp.lin.assign(grid.n(), 0.0);
  for (int i = 0; i < grid.n(); ++i) {
    if (mask[i]) sp.quad[i] = cell;
  }
  sp.lambda_coeff = map.coeff;
  sp.g_hat = map.g_hat;
  sp.box = Interval::all();

  const auto opt = sp.minimize(opts);
  const double tol = opts.tol_lambda(map.g_hat.norm());
  const double value_J = opt.value + opt.d.dot(opt.lambda) - opt.lambda.norm();
  const double theta = opt.lambda.norm() > tol
                           ? detail::wrap_angle(std::atan2(opt.d.y, opt.d.x))
                           : 0.0;

  const SlipSystem e1({1.0, 0.0});
  DeformationState state{theta, ShearProfile(grid, opt.gamma), e1};
  const Grid2D work_grid = g.is_sampled() ? g.samples().grid : Grid2D(hatg_grid.nx(), grid.n());
  double stored = 0.0;
  for (int i = 0; i < grid.n(); ++i) stored += cell * opt.gamma[i] * opt.gamma[i];
  StaticSolution sol{state, stored - work_direct(g, state, work_grid), value_J, opt.lambda,
                     opt.lambda.norm() > tol ? RotationMultiplicity::unique
                                             : RotationMultiplicity::free};
  return sol;
}

std::vector<SweepRow> static_gamma_sweep(const LoadField& g, const SlipSystem& sl, double lambda,
                                         const std::vector<int>& P_list, const Grid1D& grid,
                                         const Grid2D& hatg_grid, const SolverOptions& opts) {
  if (!sl.is_e1_axis() && !sl.is_e2_axis()) {
    throw std::invalid_argument("static_gamma_sweep: slip must be e1 or e2");
  }
  const StaticSolution limit = minimize_I(g, sl, lambda, grid, hatg_grid, opts);

  std::vector<SweepRow> rows;
  rows.reserve(P_list.size());
  for (int P : P_list) {
    const Microstructure ms(lambda, P);
    SweepRow row{P, ms.epsilon(), 0.0, limit.value_J, 0.0, 0.0};
    if (sl.is_e2_axis()) {
      // Vanishing shear is forced: the minimum is -|g_hat| at every scale.
      row.min_eps = -hat_g(g, hatg_grid).norm();
      const EpsState rec{limit.state.theta, EpsShearProfile::zero(ms, grid)};
      row.recovery_gap = energy_eps(rec, &g, &hatg_grid) - limit.value_J;
    } else {
      row.min_eps = minimize_eps_rig(g, ms, grid, hatg_grid, opts).value_J;
      const EpsState rec = recovery_e1(limit.state.shear, ms, limit.state.theta);
      row.recovery_gap = energy_eps(rec, &g, &hatg_grid) - limit.value_J;
    }
    row.gap = row.min_eps - row.limit_min;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sliphom
