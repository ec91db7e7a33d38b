#pragma once

#include <cstddef>

#include "dyadot/geometry.hpp"
#include "dyadot/point_process.hpp"

namespace dyadot {

struct SemidiscreteResult {
  /// Squared transport cost between the unit-mass points and the
  /// discretized density (total, not per point).
  double value = 0.0;
  /// Half-diagonal of a grid cell, h/sqrt(2). Moving the density to cell
  /// centres moves no mass farther than this.
  double discretization_radius = 0.0;
  /// Set when the point set is empty; value is then 0.
  bool empty_warning = false;
  std::size_t point_count = 0;
  std::size_t cell_count = 0;
};

/// W_2^2 between the points of `ps` inside `box` (unit masses) and
/// density * Lebesgue on `box`. The density is placed at the centres of an
/// h-grid and the resulting discrete problem is solved exactly. Requires
/// density * area(box) == |ps| (relative 1e-9) and box sides that are
/// multiples of h.
SemidiscreteResult semidiscrete_w2(const PointSet& ps, const Box& box, double density,
                                   double h);

}  // namespace dyadot
