#include "sliphom/state.hpp"

#include <cmath>
#include <stdexcept>

namespace sliphom {

ShearProfile::ShearProfile(Grid1D grid, std::vector<double> gamma)
    : grid_(grid), gamma_(std::move(gamma)) {
  const int n = grid_.n();
  if (static_cast<int>(gamma_.size()) != n) {
    throw std::invalid_argument("ShearProfile: gamma size does not match grid");
  }
  nodes_.resize(n + 1);
  nodes_[0] = 0.0;
  const double h = grid_.h();
  for (int i = 0; i < n; ++i) nodes_[i + 1] = nodes_[i] + h * gamma_[i];
  // Shift so the piecewise-linear reconstruction has zero mean on (-1,1).
  double integral = 0.0;
  for (int i = 0; i < n; ++i) integral += 0.5 * h * (nodes_[i] + nodes_[i + 1]);
  const double mean = 0.5 * integral;
  for (double& v : nodes_) v -= mean;
}

ShearProfile ShearProfile::zero(const Grid1D& grid) {
  return ShearProfile(grid, std::vector<double>(grid.n(), 0.0));
}

ShearProfile ShearProfile::from_function(const Grid1D& grid,
                                         const std::function<double(double)>& gamma_of_x2) {
  std::vector<double> g(grid.n());
  for (int i = 0; i < grid.n(); ++i) g[i] = gamma_of_x2(grid.midpoint(i));
  return ShearProfile(grid, std::move(g));
}

double ShearProfile::value_at(double x2) const {
  const int i = grid_.locate(x2);
  return nodes_[i] + (x2 - grid_.node(i)) * gamma_[i];
}

double ShearProfile::mean() const {
  const double h = grid_.h();
  double integral = 0.0;
  for (int i = 0; i < n(); ++i) integral += 0.5 * h * (nodes_[i] + nodes_[i + 1]);
  return 0.5 * integral;
}

double ShearProfile::max_abs_gamma() const {
  double m = 0.0;
  for (double g : gamma_) m = std::max(m, std::abs(g));
  return m;
}

}  // namespace sliphom
