#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace sliphom {

enum class DissipationKind {
  L1,        // delta * L1 distance of the shear coefficients
  monotone,  // same, +infinity unless the shear is pointwise non-increasing
};

struct DissipationSpec {
  DissipationKind kind = DissipationKind::L1;
  double delta = 1.0;

  DissipationSpec() = default;
  DissipationSpec(DissipationKind k, double d) : kind(k), delta(d) {
    if (d <= 0.0) throw std::invalid_argument("DissipationSpec: delta must be > 0");
  }
};

// delta * cell_measure * sum |prev_i - next_i|; +infinity for the monotone
// kind when any cell increases beyond 1e-12.
inline double dissipation_cells(const DissipationSpec& d, std::span<const double> prev,
                                std::span<const double> next, double cell_measure) {
  if (prev.size() != next.size()) {
    throw std::invalid_argument("dissipation: shear vectors live on different grids");
  }
  double l1 = 0.0;
  for (size_t i = 0; i < prev.size(); ++i) {
    if (d.kind == DissipationKind::monotone && next[i] > prev[i] + 1e-12) {
      return std::numeric_limits<double>::infinity();
    }
    l1 += std::abs(prev[i] - next[i]);
  }
  return d.delta * cell_measure * l1;
}

}  // namespace sliphom
