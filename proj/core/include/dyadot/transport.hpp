#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dyadot/geometry.hpp"

namespace dyadot {

/// Sparse coupling between weighted sources and targets.
struct TransportPlan {
  struct Entry {
    int source = 0;
    int target = 0;
    double mass = 0.0;
  };
  std::vector<Entry> entries;
  std::vector<double> source_mass;
  std::vector<double> target_mass;
  double cost = 0.0;

  std::vector<double> row_sums() const;
  std::vector<double> column_sums() const;
};

/// Exact optimal plan for the transportation LP with a dense row-major cost
/// matrix (sources x targets). Total masses must agree to 1e-9 relative.
/// Returns a vertex (basic) solution.
TransportPlan solve_transport(std::span<const double> source_masses,
                              std::span<const double> target_masses,
                              std::span<const double> cost_matrix);

enum class GroundCost { kEuclidean, kSquaredEuclidean };

inline double ground_cost(GroundCost kind, const Point& a, const Point& b) {
  return kind == GroundCost::kEuclidean ? distance(a, b) : squared_distance(a, b);
}

struct GeometricTransportOptions {
  /// Initial candidate radius; every source starts connected to all targets
  /// within this distance. <= 0 picks a radius from the target density.
  double initial_radius = 0.0;
  /// Pricing stops once no missing arc has reduced cost below -tol * scale,
  /// where scale is the largest candidate cost seen.
  double tolerance = 1e-10;
  int max_rounds = 200;
  /// Most violated missing arcs added per source in one pricing round.
  std::size_t pricing_batch = 16;
};

struct GeometricTransportResult {
  struct Flow {
    int source = 0;
    int target = 0;
    std::int64_t amount = 0;
    double cost = 0.0;
  };
  std::vector<Flow> flows;
  /// Sum of amount * cost over flows.
  double total_cost = 0.0;
  /// Dual potentials certifying optimality on the complete bipartite graph:
  /// target_potential[j] - source_potential[i] <= cost(i,j) for all pairs
  /// (up to tolerance), with equality on flows.
  std::vector<double> source_potential;
  std::vector<double> target_potential;
  int rounds = 0;
  std::size_t final_arc_count = 0;
  std::int64_t simplex_iterations = 0;
};

/// Exact min-cost transport between integer-weighted planar point sets on the
/// complete bipartite graph, solved by network simplex on a sparse candidate
/// graph that is grown by geometric pricing until the dual certificate holds
/// for every pair.
GeometricTransportResult solve_geometric_transport(
    std::span<const Point> sources, std::span<const std::int64_t> supply,
    std::span<const Point> targets, std::span<const std::int64_t> demand,
    GroundCost cost_kind, const GeometricTransportOptions& options = {});

}  // namespace dyadot
