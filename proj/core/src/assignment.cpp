#include "dyadot/assignment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dyadot/errors.hpp"
#include "dyadot/transport.hpp"

namespace dyadot {

double pair_cost(const Point& a, const Point& b, int exponent) {
  return exponent == 1 ? distance(a, b) : squared_distance(a, b);
}

namespace {

void check_exponent(int exponent) {
  if (exponent != 1 && exponent != 2) {
    throw std::invalid_argument("exponent must be 1 or 2");
  }
}

// Shortest augmenting paths with row/column potentials (Kuhn-Munkres in the
// Jonker-Volgenant formulation). Rows are inserted one at a time; each
// insertion runs a Dijkstra over columns on reduced costs.
std::vector<int> dense_assignment(std::span<const Point> a, std::span<const Point> b,
                                  int exponent) {
  const std::size_t n = a.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<std::size_t> row_of(n + 1, 0);  // column -> row, 1-based, 0 free
  std::vector<std::size_t> way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);
  std::vector<double> row_cost(n);

  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of[j0];
      const Point& p = a[i0 - 1];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = pair_cost(p, b[j - 1], exponent) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> sigma(n);
  for (std::size_t j = 1; j <= n; ++j) sigma[row_of[j] - 1] = static_cast<int>(j - 1);
  return sigma;
}

std::vector<int> sparse_assignment(std::span<const Point> a, std::span<const Point> b,
                                   int exponent) {
  const std::vector<std::int64_t> ones(a.size(), 1);
  const auto result = solve_geometric_transport(
      a, ones, b, ones,
      exponent == 1 ? GroundCost::kEuclidean : GroundCost::kSquaredEuclidean);
  std::vector<int> sigma(a.size(), -1);
  for (const auto& f : result.flows) {
    if (f.amount != 1 || sigma[static_cast<std::size_t>(f.source)] != -1) {
      throw std::logic_error("sparse assignment: flow is not a permutation");
    }
    sigma[static_cast<std::size_t>(f.source)] = f.target;
  }
  return sigma;
}

}  // namespace

double matching_cost(std::span<const Point> a, std::span<const Point> b,
                     std::span<const int> sigma, int exponent) {
  double total = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    total += pair_cost(a[i], b[static_cast<std::size_t>(sigma[i])], exponent);
  }
  return total;
}

void validate_plan(const MatchingPlan& plan, std::size_t n) {
  if (plan.sigma.size() != n) throw std::invalid_argument("plan size differs from point count");
  std::vector<char> seen(n, 0);
  for (int j : plan.sigma) {
    if (j < 0 || static_cast<std::size_t>(j) >= n || seen[static_cast<std::size_t>(j)]) {
      throw std::invalid_argument("plan is not a permutation");
    }
    seen[static_cast<std::size_t>(j)] = 1;
  }
}

MatchingPlan solve_assignment(std::span<const Point> a, std::span<const Point> b,
                              int exponent, AssignmentMethod method) {
  check_exponent(exponent);
  if (a.size() != b.size()) {
    throw std::invalid_argument("solve_assignment: point sets differ in size");
  }
  if (method == AssignmentMethod::kAuto) {
    method = a.size() <= kDenseAssignmentLimit ? AssignmentMethod::kDense
                                               : AssignmentMethod::kSparse;
  }
  MatchingPlan plan;
  plan.exponent = exponent;
  plan.sigma = method == AssignmentMethod::kDense ? dense_assignment(a, b, exponent)
                                                  : sparse_assignment(a, b, exponent);
  plan.cost = matching_cost(a, b, plan.sigma, exponent);
  return plan;
}

MatchingPlan solve_assignment(const PointSet& a, const PointSet& b, int exponent,
                              AssignmentMethod method) {
  return solve_assignment(std::span<const Point>(a.points()),
                          std::span<const Point>(b.points()), exponent, method);
}

CycleReport verify_cyclic_monotonicity(const MatchingPlan& plan, std::span<const Point> a,
                                       std::span<const Point> b, std::int64_t cycles,
                                       int max_len, double scale, RngStream& rng) {
  validate_plan(plan, a.size());
  if (b.size() != a.size()) throw std::invalid_argument("point sets differ in size");
  CycleReport report;
  report.tolerance = -1e-9 * scale * scale;
  report.min_sum = std::numeric_limits<double>::infinity();
  const std::size_t n = a.size();
  if (n < 2 || cycles <= 0) {
    report.min_sum = 0.0;
    return report;
  }
  const int longest = std::clamp<int>(max_len, 2, static_cast<int>(std::min<std::size_t>(n, 64)));
  std::vector<std::size_t> idx;
  for (std::int64_t c = 0; c < cycles; ++c) {
    const int len = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(longest - 1));
    idx.clear();
    while (idx.size() < static_cast<std::size_t>(len)) {
      const std::size_t k = static_cast<std::size_t>(rng() % n);
      if (std::find(idx.begin(), idx.end(), k) == idx.end()) idx.push_back(k);
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < idx.size(); ++t) {
      const Point& x = a[idx[t]];
      const Point& prev = a[idx[t == 0 ? idx.size() - 1 : t - 1]];
      const Point& tx = b[static_cast<std::size_t>(plan.sigma[idx[t]])];
      sum += tx.x * (x.x - prev.x) + tx.y * (x.y - prev.y);
    }
    ++report.cycles;
    report.min_sum = std::min(report.min_sum, sum);
    if (sum < report.tolerance) ++report.violations;
  }
  return report;
}

CycleReport verify_cyclic_monotonicity(const MatchingPlan& plan, const PointSet& a,
                                       const PointSet& b, std::int64_t cycles, int max_len,
                                       RngStream& rng) {
  const double scale = std::max(a.box().width(), a.box().height());
  return verify_cyclic_monotonicity(plan, a.points(), b.points(), cycles, max_len, scale,
                                    rng);
}

double two_point_swap_gap(const MatchingPlan& plan, std::span<const Point> a,
                          std::span<const Point> b) {
  validate_plan(plan, a.size());
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& bi = b[static_cast<std::size_t>(plan.sigma[i])];
    const double ci = pair_cost(a[i], bi, plan.exponent);
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point& bj = b[static_cast<std::size_t>(plan.sigma[j])];
      const double delta = pair_cost(a[i], bj, plan.exponent) +
                           pair_cost(a[j], bi, plan.exponent) - ci -
                           pair_cost(a[j], bj, plan.exponent);
      best = std::min(best, delta);
    }
  }
  return best;
}

void write_matching_csv(const MatchingPlan& plan, std::span<const Point> a,
                        std::span<const Point> b, const std::filesystem::path& path) {
  validate_plan(plan, a.size());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "i,j,cost_ij\n";
  char line[96];
  for (std::size_t i = 0; i < plan.sigma.size(); ++i) {
    const int j = plan.sigma[i];
    std::snprintf(line, sizeof line, "%zu,%d,%.17g\n", i, j,
                  pair_cost(a[i], b[static_cast<std::size_t>(j)], plan.exponent));
    out << line;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dyadot
