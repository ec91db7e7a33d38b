#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dyadot/geometry.hpp"
#include "dyadot/point_process.hpp"
#include "dyadot/rng.hpp"

namespace dyadot {

/// Bijection sigma from source indices onto target indices.
struct MatchingPlan {
  std::vector<int> sigma;
  double cost = 0.0;
  int exponent = 2;
};

/// |a-b|^p for p in {1,2}.
double pair_cost(const Point& a, const Point& b, int exponent);

enum class AssignmentMethod {
  kAuto,    // dense below kDenseAssignmentLimit points, sparse above
  kDense,   // shortest augmenting paths on the full cost matrix, O(n^3)
  kSparse,  // network simplex on a geometrically priced candidate graph
};

inline constexpr std::size_t kDenseAssignmentLimit = 1200;

/// Globally optimal bijection for cost |a_i - b_sigma(i)|^p. Both methods are
/// exact; the sparse one certifies optimality with dual potentials over all
/// n^2 pairs. Same input bytes give the same sigma.
MatchingPlan solve_assignment(std::span<const Point> a, std::span<const Point> b,
                              int exponent,
                              AssignmentMethod method = AssignmentMethod::kAuto);
MatchingPlan solve_assignment(const PointSet& a, const PointSet& b, int exponent,
                              AssignmentMethod method = AssignmentMethod::kAuto);

/// Sum of pair costs of `sigma`, recomputed from coordinates.
double matching_cost(std::span<const Point> a, std::span<const Point> b,
                     std::span<const int> sigma, int exponent);

/// Throws std::invalid_argument unless sigma is a permutation of 0..n-1.
void validate_plan(const MatchingPlan& plan, std::size_t n);

struct CycleReport {
  std::int64_t cycles = 0;
  double min_sum = 0.0;
  std::int64_t violations = 0;
  /// Sums below this count as violations (-1e-9 * scale^2).
  double tolerance = 0.0;
};

/// Samples `cycles` random index cycles X_1..X_N (N uniform in 2..max_len,
/// distinct indices) and evaluates sum_n T(X_n).(X_n - X_{n-1}) with
/// X_0 = X_N and T(X_n) = b[sigma(n)]. `scale` is the box side.
CycleReport verify_cyclic_monotonicity(const MatchingPlan& plan, std::span<const Point> a,
                                       std::span<const Point> b, std::int64_t cycles,
                                       int max_len, double scale, RngStream& rng);
CycleReport verify_cyclic_monotonicity(const MatchingPlan& plan, const PointSet& a,
                                       const PointSet& b, std::int64_t cycles, int max_len,
                                       RngStream& rng);

/// Minimum over pairs i<j of the cost change caused by exchanging their
/// targets. Zero when n < 2.
double two_point_swap_gap(const MatchingPlan& plan, std::span<const Point> a,
                          std::span<const Point> b);

/// CSV `i,j,cost_ij`, one row per source.
void write_matching_csv(const MatchingPlan& plan, std::span<const Point> a,
                        std::span<const Point> b, const std::filesystem::path& path);

}  // namespace dyadot
