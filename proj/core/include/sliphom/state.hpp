#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sliphom/geometry.hpp"

namespace sliphom {

// Piecewise-constant shear coefficient gamma on a 1-D grid over x2 together
// with its zero-mean piecewise-linear antiderivative Gamma stored at the
// grid nodes. Depending on x2 only, the profile carries no x1 variation by
// construction.
class ShearProfile {
 public:
  ShearProfile(Grid1D grid, std::vector<double> gamma);
  static ShearProfile zero(const Grid1D& grid);
  static ShearProfile from_function(const Grid1D& grid,
                                    const std::function<double(double)>& gamma_of_x2);

  const Grid1D& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  double gamma(int i) const { return gamma_[i]; }
  std::span<const double> gamma() const { return gamma_; }
  double node_value(int i) const { return nodes_[i]; }  // i in [0, n]
  std::span<const double> node_values() const { return nodes_; }

  // Piecewise-linear evaluation; x2 clamped to [-1, 1].
  double value_at(double x2) const;

  // Mean of the reconstructed antiderivative over (-1,1); ~0 by construction.
  double mean() const;

  double max_abs_gamma() const;

 private:
  Grid1D grid_;
  std::vector<double> gamma_;
  std::vector<double> nodes_;
};

// State of the homogenized model: a global rotation angle, the shear
// profile, and the slip system whose interval constrains the profile.
struct DeformationState {
  double theta;
  ShearProfile shear;
  SlipSystem slip;

  Vec2 rot_e1() const { return rotation_e1(theta); }

  // Deformation y(x) = R (x + Gamma(x2) e1).
  Vec2 displace(Vec2 x) const {
    const Vec2 shifted{x.x + shear.value_at(x.y), x.y};
    return rotation(theta) * shifted;
  }
};

}  // namespace sliphom
