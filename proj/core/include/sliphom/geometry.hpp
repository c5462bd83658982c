#pragma once

#include <limits>
#include <vector>

#include "sliphom/vec.hpp"

namespace sliphom {

inline constexpr double kUnitTol = 1e-12;

// Reference configuration: the square (-1,1)^2, barycenter at the origin.
struct SquareDomain {
  static constexpr double half_width = 1.0;
  static constexpr double area = 4.0;
};

// Slip direction s on the unit circle with slip-plane normal m = s^perp.
class SlipSystem {
 public:
  explicit SlipSystem(Vec2 s);
  static SlipSystem from_angle_deg(double degrees);

  Vec2 s() const { return s_; }
  Vec2 m() const { return m_; }
  double s1() const { return s_.x; }
  double s2() const { return s_.y; }

  // Axis tests use exact component comparison within kUnitTol.
  bool is_e1_axis() const { return std::abs(s_.y) <= kUnitTol; }
  bool is_e2_axis() const { return std::abs(s_.x) <= kUnitTol; }

 private:
  Vec2 s_;
  Vec2 m_;
};

// Closed interval, possibly unbounded on either side.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Interval all() { return {}; }
  static Interval point(double v) { return {v, v}; }
  static Interval bounded(double a, double b) { return a <= b ? Interval{a, b} : Interval{b, a}; }

  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
  bool is_point() const { return lo == hi; }
};

// Admissible range of the homogenized shear coefficient for slip direction s
// and soft volume fraction lambda: {0} for s = +-e2, all of R for s = +-e1,
// and the closed interval between 0 and -2*lambda*s1/s2 otherwise.
Interval shear_interval(const SlipSystem& sl, double lambda);

// Bilayered microstructure: period epsilon = 2/P, soft fraction lambda.
// Within each period the lower lambda-fraction is the soft layer.
struct Microstructure {
  double lambda;
  int periods;

  Microstructure(double lambda_, int periods_);
  double epsilon() const { return 2.0 / periods; }
};

// Uniform cell grid over x2 in (-1,1).
class Grid1D {
 public:
  explicit Grid1D(int n_cells);

  int n() const { return n_; }
  double h() const { return 2.0 / n_; }
  double node(int i) const { return -1.0 + i * h(); }          // i in [0, n]
  double midpoint(int i) const { return -1.0 + (i + 0.5) * h(); }

  // Two-point Gauss-Legendre abscissae of cell i.
  double gauss(int i, int which) const {
    const double half = 0.5 * h();
    const double offset = half / kSqrt3;
    return midpoint(i) + (which == 0 ? -offset : offset);
  }
  int locate(double x2) const;  // cell index containing x2, clamped to [0, n-1]

  static constexpr double kSqrt3 = 1.7320508075688772935;

 private:
  int n_;
};

// Tensor-product cell grid over (-1,1)^2 with 2x2 Gauss points per cell.
class Grid2D {
 public:
  Grid2D(int n_x1, int n_x2);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return 2.0 / nx_; }
  double hy() const { return 2.0 / ny_; }
  Grid1D x1_grid() const { return Grid1D(nx_); }
  Grid1D x2_grid() const { return Grid1D(ny_); }
  double weight() const { return 0.25 * hx() * hy(); }  // per Gauss point
  int n_gauss() const { return 4 * nx_ * ny_; }

  // Gauss points enumerated cell-major: (cx, cy, gx, gy).
  Vec2 gauss_point(int cx, int cy, int gx, int gy) const {
    return {x1_grid().gauss(cx, gx), x2_grid().gauss(cy, gy)};
  }
  int gauss_index(int cx, int cy, int gx, int gy) const {
    return ((cx * ny_ + cy) * 2 + gx) * 2 + gy;
  }

 private:
  int nx_;
  int ny_;
};

// Per-cell soft/rigid flags; true marks a cell inside the soft layers.
// Requires the grid to resolve the microstructure exactly: n divisible by
// the period count and lambda * (cells per period) integral.
std::vector<bool> soft_mask(const Microstructure& ms, const Grid1D& grid);

// Membership in {F : det F = 1, |F s| = 1} within tol.
bool in_Ms(const Mat2& F, const SlipSystem& sl, double tol);

}  // namespace sliphom
