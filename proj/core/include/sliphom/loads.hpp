#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "sliphom/geometry.hpp"
#include "sliphom/state.hpp"

namespace sliphom {

// Body-force density g on (-1,1)^2. Affine and polynomial kinds evaluate
// exactly at any point; a sampled field is defined only at the Gauss points
// of its declared grid.
class LoadField {
 public:
  enum class Kind { affine, polynomial, sampled };

  // One polynomial term a * (x1^p x2^q, x1^r x2^s).
  struct Term {
    Mat2 a;
    int p = 0, q = 0, r = 0, s = 0;
  };

  struct Sampled {
    Grid2D grid;
    std::vector<Vec2> values;  // one per Gauss point, Grid2D::gauss_index order
  };

  static LoadField affine(const Mat2& A, Vec2 b);
  static LoadField constant(Vec2 b) { return affine(Mat2::zero(), b); }
  static LoadField zero() { return constant({0.0, 0.0}); }
  static LoadField polynomial(std::vector<Term> terms);
  static LoadField sampled(const Grid2D& grid, std::vector<Vec2> values);

  // Sample an analytic field at the Gauss points of a grid.
  LoadField sampled_on(const Grid2D& grid) const;

  Kind kind() const { return kind_; }
  bool is_sampled() const { return kind_ == Kind::sampled; }
  const Mat2& A() const { return A_; }
  Vec2 b() const { return b_; }
  const std::vector<Term>& terms() const { return terms_; }
  const Sampled& samples() const;

  // Pointwise evaluation; throws for sampled fields.
  Vec2 eval(Vec2 x) const;
  // Evaluation at a Gauss point of `grid` (any kind; sampled fields require
  // grid dimensions matching their own).
  Vec2 eval_gauss(const Grid2D& grid, int cx, int cy, int gx, int gy) const;

  // a*f + b*g for fields of compatible kinds.
  static LoadField lin_comb(double a, const LoadField& f, double b, const LoadField& g);

 private:
  LoadField() = default;
  Kind kind_ = Kind::affine;
  Mat2 A_{};
  Vec2 b_{};
  std::vector<Term> terms_;
  std::shared_ptr<const Sampled> sampled_;
};

// x1-marginal of a load evaluated at the two Gauss points of every x2 cell.
struct Marginal {
  Grid1D grid;
  std::vector<Vec2> at_gauss;  // size 2 n, [2i + which]

  Vec2 gauss(int cell, int which) const { return at_gauss[2 * cell + which]; }
};

Marginal marginal_x1(const LoadField& g, const Grid1D& grid);

// x1-marginal at an arbitrary x2 (analytic kinds only).
Vec2 marginal_x1_at(const LoadField& g, double x2);

// Load resultant: integral of x1 g - x2 g^perp over the square, by tensor
// two-point Gauss quadrature (exact per axis up to degree 3).
Vec2 hat_g(const LoadField& g, const Grid2D& grid);

// Lambda(g, Gamma) = hat_g + integral of Gamma(x2) [g]_{x1}(x2) dx2.
// The profile must carry a zero-mean Gamma (|mean| <= 1e-10).
Vec2 lambda_vec(const LoadField& g, const ShearProfile& profile, const Grid2D& hatg_grid);

// Direct two-dimensional quadrature of the work integral of g against the
// deformation y(x) = R (x + Gamma(x2) e1).
double work_direct(const LoadField& g, const DeformationState& q, const Grid2D& grid);

// Affine map gamma -> Lambda(g, Gamma(gamma)) for profiles on a fixed grid:
// Lambda = g_hat + sum_i coeff[i] * gamma[i].
struct LambdaMap {
  Vec2 g_hat;
  std::vector<Vec2> coeff;

  Vec2 value(std::span<const double> gamma) const;
};

LambdaMap assemble_lambda_map(const LoadField& g, const Grid1D& grid, const Grid2D& hatg_grid);

// The coefficient part of the map alone (no resultant).
std::vector<Vec2> lambda_coefficients(const LoadField& g, const Grid1D& grid);

// Piecewise-linear-in-time family of load fields on [0, T]. The time
// derivative is exact and constant on every table interval.
class LoadPath {
 public:
  static LoadPath constant(const LoadField& g, double T);
  static LoadPath table(std::vector<double> knots, std::vector<LoadField> fields);

  double T() const { return knots_.back(); }
  const std::vector<double>& knots() const { return knots_; }
  LoadField at(double t) const;
  // g(t1) - g(t0): equals the time integral of the rate over [t0, t1].
  LoadField delta(double t0, double t1) const;

  // Path with fields a*f(t) + b*g(t); both paths must share knots.
  static LoadPath lin_comb(double a, const LoadPath& f, double b, const LoadPath& g);

 private:
  LoadPath() = default;
  std::vector<double> knots_;
  std::vector<LoadField> fields_;
};

}  // namespace sliphom
