#include "dyadot/semidiscrete.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dyadot/transport.hpp"

namespace dyadot {

namespace {

std::int64_t cells_along(double length, double h) {
  const double m = length / h;
  const double rounded = std::round(m);
  if (rounded < 1.0 || std::abs(m - rounded) > 1e-9 * std::max(1.0, m)) {
    throw std::invalid_argument("semidiscrete_w2: box side must be a multiple of h");
  }
  return static_cast<std::int64_t>(rounded);
}

}  // namespace

SemidiscreteResult semidiscrete_w2(const PointSet& ps, const Box& box, double density,
                                   double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw std::invalid_argument("semidiscrete_w2: h must be positive");
  }
  const std::int64_t mx = cells_along(box.width(), h);
  const std::int64_t my = cells_along(box.height(), h);

  std::vector<Point> points;
  for (const Point& p : ps) {
    if (box.contains(p)) points.push_back(p);
  }
  SemidiscreteResult result;
  result.discretization_radius = h / std::sqrt(2.0);
  result.point_count = points.size();
  result.cell_count = static_cast<std::size_t>(mx * my);
  if (points.empty()) {
    result.empty_warning = true;
    return result;
  }
  const double n = static_cast<double>(points.size());
  if (!(density > 0.0) || std::abs(density * box.area() - n) > 1e-9 * n) {
    throw std::invalid_argument("semidiscrete_w2: density * area must equal the point count");
  }

  // Each point carries mx*my units and each cell |points| units, so both
  // sides have integer masses and the optimum is computed exactly.
  std::vector<Point> cells;
  cells.reserve(result.cell_count);
  for (std::int64_t j = 0; j < my; ++j) {
    for (std::int64_t i = 0; i < mx; ++i) {
      cells.push_back({box.x0 + (static_cast<double>(i) + 0.5) * h,
                       box.y0 + (static_cast<double>(j) + 0.5) * h});
    }
  }
  const std::int64_t per_point = mx * my;
  const std::vector<std::int64_t> supply(points.size(), per_point);
  const std::vector<std::int64_t> demand(cells.size(), static_cast<std::int64_t>(points.size()));
  const auto plan = solve_geometric_transport(points, supply, cells, demand,
                                              GroundCost::kSquaredEuclidean);
  result.value = plan.total_cost / static_cast<double>(per_point);
  return result;
}

}  // namespace dyadot
