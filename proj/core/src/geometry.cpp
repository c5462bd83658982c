#include "sliphom/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sliphom {

SlipSystem::SlipSystem(Vec2 s) : s_(s), m_(s.perp()) {
  if (std::abs(s.norm() - 1.0) > kUnitTol) {
    throw std::invalid_argument("SlipSystem: |s| must be 1 within 1e-12, got |s| = " +
                                std::to_string(s.norm()));
  }
}

SlipSystem SlipSystem::from_angle_deg(double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  return SlipSystem({std::cos(rad), std::sin(rad)});
}

Interval shear_interval(const SlipSystem& sl, double lambda) {
  if (lambda <= 0.0 || lambda >= 1.0) {
    throw std::invalid_argument("shear_interval: lambda must lie in (0,1)");
  }
  if (sl.is_e2_axis()) return Interval::point(0.0);
  if (sl.is_e1_axis()) return Interval::all();
  const double endpoint = -2.0 * lambda * sl.s1() / sl.s2();
  return Interval::bounded(0.0, endpoint);
}

Microstructure::Microstructure(double lambda_, int periods_)
    : lambda(lambda_), periods(periods_) {
  if (lambda <= 0.0 || lambda >= 1.0) {
    throw std::invalid_argument("Microstructure: lambda must lie in (0,1)");
  }
  if (periods < 1) {
    throw std::invalid_argument("Microstructure: period count must be >= 1");
  }
}

Grid1D::Grid1D(int n_cells) : n_(n_cells) {
  if (n_cells < 1) throw std::invalid_argument("Grid1D: n_cells must be >= 1");
}

int Grid1D::locate(double x2) const {
  int i = static_cast<int>(std::floor((x2 + 1.0) / h()));
  if (i < 0) i = 0;
  if (i >= n_) i = n_ - 1;
  return i;
}

Grid2D::Grid2D(int n_x1, int n_x2) : nx_(n_x1), ny_(n_x2) {
  if (n_x1 < 1 || n_x2 < 1) throw std::invalid_argument("Grid2D: cell counts must be >= 1");
}

std::vector<bool> soft_mask(const Microstructure& ms, const Grid1D& grid) {
  const int n = grid.n();
  const int P = ms.periods;
  if (n % P != 0) {
    throw std::invalid_argument("soft_mask: n_cells = " + std::to_string(n) +
                                " is not a multiple of the period count " + std::to_string(P));
  }
  const int per = n / P;
  const double soft_exact = ms.lambda * per;
  const int soft = static_cast<int>(std::lround(soft_exact));
  if (std::abs(soft_exact - soft) > 1e-9 || soft < 1 || soft >= per) {
    throw std::invalid_argument(
        "soft_mask: lambda * (cells per period) = " + std::to_string(soft_exact) +
        " must be a positive integer smaller than the cells per period");
  }
  std::vector<bool> mask(n);
  for (int i = 0; i < n; ++i) mask[i] = (i % per) < soft;
  return mask;
}

bool in_Ms(const Mat2& F, const SlipSystem& sl, double tol) {
  const double det_err = std::abs(F.det() - 1.0);
  const double slip_err = std::abs((F * sl.s()).norm() - 1.0);
  return det_err <= tol && slip_err <= tol;
}

}  // namespace sliphom
