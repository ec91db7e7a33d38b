#include "dyadot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <utility>

#include "dyadot/network_simplex.hpp"

namespace dyadot {

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> sums(source_mass.size(), 0.0);
  for (const auto& e : entries) sums[static_cast<std::size_t>(e.source)] += e.mass;
  return sums;
}

std::vector<double> TransportPlan::column_sums() const {
  std::vector<double> sums(target_mass.size(), 0.0);
  for (const auto& e : entries) sums[static_cast<std::size_t>(e.target)] += e.mass;
  return sums;
}

TransportPlan solve_transport(std::span<const double> source_masses,
                              std::span<const double> target_masses,
                              std::span<const double> cost_matrix) {
  const std::size_t m = source_masses.size();
  const std::size_t n = target_masses.size();
  if (cost_matrix.size() != m * n) {
    throw std::invalid_argument("solve_transport: cost matrix must be sources x targets");
  }
  double total_src = 0.0;
  double total_dst = 0.0;
  for (double a : source_masses) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw std::invalid_argument("solve_transport: masses must be finite and >= 0");
    }
    total_src += a;
  }
  for (double b : target_masses) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw std::invalid_argument("solve_transport: masses must be finite and >= 0");
    }
    total_dst += b;
  }
  const double scale = std::max({total_src, total_dst, 1e-300});
  if (std::abs(total_src - total_dst) > 1e-9 * scale) {
    throw std::invalid_argument("solve_transport: source and target masses differ");
  }

  TransportPlan plan;
  plan.source_mass.assign(source_masses.begin(), source_masses.end());
  plan.target_mass.assign(target_masses.begin(), target_masses.end());
  if (m == 0 || n == 0) return plan;

  NetworkSimplex<double> ns(static_cast<int>(m + n));
  ns.reserve_arcs(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    ns.set_supply(static_cast<int>(i), source_masses[i]);
    for (std::size_t j = 0; j < n; ++j) {
      ns.add_arc(static_cast<int>(i), static_cast<int>(m + j), cost_matrix[i * n + j]);
    }
  }
  // Put the rounding difference between the totals on the last target so the
  // supplies balance exactly.
  double residual = total_src;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    ns.set_supply(static_cast<int>(m + j), -target_masses[j]);
    residual -= target_masses[j];
  }
  ns.set_supply(static_cast<int>(m + n - 1), -residual);

  if (ns.run() != SimplexStatus::kOptimal) {
    throw std::runtime_error("solve_transport: network simplex failed");
  }
  for (int e = 0; e < ns.arc_count(); ++e) {
    const double f = ns.flow(e);
    if (f > 0.0) {
      plan.entries.push_back({ns.arc_source(e), ns.arc_target(e) - static_cast<int>(m), f});
      plan.cost += f * ns.arc_cost(e);
    }
  }
  return plan;
}

namespace {

// Uniform bucket grid over a set of points for radius queries.
class BucketGrid {
 public:
  BucketGrid(std::span<const Point> pts, double bucket_size) : pts_(pts) {
    double x0 = std::numeric_limits<double>::infinity();
    double y0 = x0;
    double x1 = -x0;
    double y1 = -x0;
    for (const Point& p : pts) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
    x0_ = x0;
    y0_ = y0;
    size_ = bucket_size;
    nx_ = std::max(1, static_cast<int>(std::floor((x1 - x0) / size_)) + 1);
    ny_ = std::max(1, static_cast<int>(std::floor((y1 - y0) / size_)) + 1);
    start_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_) + 1, 0);
    std::vector<int> bucket_of(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      bucket_of[k] = bucket_index(pts[k]);
      ++start_[static_cast<std::size_t>(bucket_of[k]) + 1];
    }
    for (std::size_t b = 1; b < start_.size(); ++b) start_[b] += start_[b - 1];
    ids_.resize(pts.size());
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      ids_[static_cast<std::size_t>(fill[static_cast<std::size_t>(bucket_of[k])]++)] =
          static_cast<int>(k);
    }
  }

  double extent() const { return std::max(nx_, ny_) * size_; }

  template <typename F>
  void for_each_within(const Point& p, double radius, F&& f) const {
    const int bx0 = clamp_x(static_cast<int>(std::floor((p.x - radius - x0_) / size_)));
    const int bx1 = clamp_x(static_cast<int>(std::floor((p.x + radius - x0_) / size_)));
    const int by0 = clamp_y(static_cast<int>(std::floor((p.y - radius - y0_) / size_)));
    const int by1 = clamp_y(static_cast<int>(std::floor((p.y + radius - y0_) / size_)));
    const double r2 = radius * radius;
    for (int by = by0; by <= by1; ++by) {
      for (int bx = bx0; bx <= bx1; ++bx) {
        const std::size_t b = static_cast<std::size_t>(by) * static_cast<std::size_t>(nx_) +
                              static_cast<std::size_t>(bx);
        for (int k = start_[b]; k < start_[b + 1]; ++k) {
          const int id = ids_[static_cast<std::size_t>(k)];
          if (squared_distance(p, pts_[static_cast<std::size_t>(id)]) <= r2) f(id);
        }
      }
    }
  }

 private:
  int bucket_index(const Point& p) const {
    const int bx = clamp_x(static_cast<int>(std::floor((p.x - x0_) / size_)));
    const int by = clamp_y(static_cast<int>(std::floor((p.y - y0_) / size_)));
    return by * nx_ + bx;
  }
  int clamp_x(int b) const { return std::clamp(b, 0, nx_ - 1); }
  int clamp_y(int b) const { return std::clamp(b, 0, ny_ - 1); }

  std::span<const Point> pts_;
  double x0_ = 0.0;
  double y0_ = 0.0;
  double size_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<int> start_;
  std::vector<int> ids_;
};

// Shortest-path potentials of the residual graph of an optimal restricted
// flow, from a virtual node joined to every node by a zero-cost arc. The
// simplex potentials make all residual arc weights non-negative, so Dijkstra
// applies (Johnson reweighting). The resulting labels are dual feasible for
// the restricted problem, complementary to the flow, and free of the large
// offsets that artificial root arcs can leave in simplex potentials.
std::vector<double> residual_potentials(const NetworkSimplex<std::int64_t>& ns) {
  const int n = ns.node_count();
  const std::size_t sn = static_cast<std::size_t>(n);
  std::vector<double> pi(sn);
  double pi_max = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < n; ++v) {
    pi[static_cast<std::size_t>(v)] = ns.potential(v);
    pi_max = std::max(pi_max, ns.potential(v));
  }

  // CSR adjacency of the residual graph with reweighted lengths.
  std::vector<int> start(sn + 1, 0);
  const int m = ns.arc_count();
  for (int e = 0; e < m; ++e) {
    ++start[static_cast<std::size_t>(ns.arc_source(e)) + 1];
    if (ns.flow(e) > 0) ++start[static_cast<std::size_t>(ns.arc_target(e)) + 1];
  }
  for (std::size_t v = 1; v <= sn; ++v) start[v] += start[v - 1];
  std::vector<int> head(static_cast<std::size_t>(start[sn]));
  std::vector<double> weight(head.size());
  std::vector<int> fill(start.begin(), start.end() - 1);
  for (int e = 0; e < m; ++e) {
    const int u = ns.arc_source(e);
    const int v = ns.arc_target(e);
    const double red = ns.arc_cost(e) + pi[static_cast<std::size_t>(u)] -
                       pi[static_cast<std::size_t>(v)];
    std::size_t slot = static_cast<std::size_t>(fill[static_cast<std::size_t>(u)]++);
    head[slot] = v;
    weight[slot] = std::max(0.0, red);
    if (ns.flow(e) > 0) {
      slot = static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++);
      head[slot] = u;
      weight[slot] = std::max(0.0, -red);
    }
  }

  std::vector<double> dist(sn);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (int v = 0; v < n; ++v) {
    dist[static_cast<std::size_t>(v)] = pi_max - pi[static_cast<std::size_t>(v)];
    heap.emplace(dist[static_cast<std::size_t>(v)], v);
  }
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    for (int k = start[static_cast<std::size_t>(u)]; k < start[static_cast<std::size_t>(u) + 1];
         ++k) {
      const int v = head[static_cast<std::size_t>(k)];
      const double nd = d + weight[static_cast<std::size_t>(k)];
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        heap.emplace(nd, v);
      }
    }
  }
  for (std::size_t v = 0; v < sn; ++v) dist[v] = dist[v] - pi_max + pi[v];
  return dist;
}

}  // namespace

GeometricTransportResult solve_geometric_transport(
    std::span<const Point> sources, std::span<const std::int64_t> supply,
    std::span<const Point> targets, std::span<const std::int64_t> demand,
    GroundCost cost_kind, const GeometricTransportOptions& options) {
  const std::size_t ns_count = sources.size();
  const std::size_t nt_count = targets.size();
  if (supply.size() != ns_count || demand.size() != nt_count) {
    throw std::invalid_argument("solve_geometric_transport: weight/point count mismatch");
  }
  std::int64_t total_supply = 0;
  std::int64_t total_demand = 0;
  for (auto s : supply) {
    if (s < 0) throw std::invalid_argument("solve_geometric_transport: negative supply");
    total_supply += s;
  }
  for (auto d : demand) {
    if (d < 0) throw std::invalid_argument("solve_geometric_transport: negative demand");
    total_demand += d;
  }
  if (total_supply != total_demand) {
    throw std::invalid_argument("solve_geometric_transport: supply and demand differ");
  }

  GeometricTransportResult result;
  result.source_potential.assign(ns_count, 0.0);
  result.target_potential.assign(nt_count, 0.0);
  if (ns_count == 0 || nt_count == 0 || total_supply == 0) return result;

  BucketGrid grid(targets, 1.0);
  double radius = options.initial_radius;
  if (radius <= 0.0) {
    // Enough candidates for each source to cover several times its own mass.
    const double area = std::max(grid.extent() * grid.extent(), 1e-12);
    const double target_density = static_cast<double>(nt_count) / area;
    const double per_source = std::max(
        50.0, 6.0 * static_cast<double>(nt_count) / static_cast<double>(ns_count));
    radius = std::sqrt(per_source / (std::numbers::pi * target_density));
  }
  const BucketGrid buckets(targets, std::max(radius, 1e-9));
  const BucketGrid source_buckets(sources, std::max(radius, 1e-9));

  // Candidate arcs, with per-source sorted target lists for membership.
  std::vector<std::vector<int>> adjacency(ns_count);
  const int n_nodes = static_cast<int>(ns_count + nt_count);
  NetworkSimplex<std::int64_t> ns(n_nodes);
  for (std::size_t i = 0; i < ns_count; ++i) ns.set_supply(static_cast<int>(i), supply[i]);
  for (std::size_t j = 0; j < nt_count; ++j) {
    ns.set_supply(static_cast<int>(ns_count + j), -demand[j]);
  }
  // Arcs arrive over several rounds, so the artificial cost has to dominate
  // every pair, not just the initial candidates.
  {
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
    for (auto pts : {sources, targets}) {
      for (const Point& p : pts) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
      }
    }
    const double worst = ground_cost(cost_kind, Point{x0, y0}, Point{x1, y1});
    ns.set_artificial_cost((worst + 1.0) * static_cast<double>(n_nodes + 1));
  }
  double max_cost = 0.0;
  std::size_t arc_total = 0;
  auto try_add = [&](int i, int j, double c) {
    auto& adj = adjacency[static_cast<std::size_t>(i)];
    const auto it = std::lower_bound(adj.begin(), adj.end(), j);
    if (it != adj.end() && *it == j) return false;
    adj.insert(it, j);
    ns.add_arc(i, static_cast<int>(ns_count) + j, c);
    max_cost = std::max(max_cost, c);
    ++arc_total;
    return true;
  };
  auto connect = [&](int i, int j) {
    try_add(i, j,
            ground_cost(cost_kind, sources[static_cast<std::size_t>(i)],
                        targets[static_cast<std::size_t>(j)]));
  };
  for (std::size_t i = 0; i < ns_count; ++i) {
    buckets.for_each_within(sources[i], radius,
                            [&](int j) { connect(static_cast<int>(i), j); });
  }
  // Local neighbourhood radii, grown around nodes the restricted problem
  // cannot serve.
  std::vector<double> source_radius(ns_count, radius);
  std::vector<double> target_radius(nt_count, radius);

  for (int round = 0;; ++round) {
    if (round >= options.max_rounds) {
      throw std::runtime_error("solve_geometric_transport: pricing did not converge");
    }
    const SimplexStatus status = ns.run();
    result.simplex_iterations += ns.iterations();
    result.rounds = round + 1;
    if (status == SimplexStatus::kInfeasible) {
      for (std::size_t i = 0; i < ns_count; ++i) {
        if (ns.unmet(static_cast<int>(i)) == 0) continue;
        source_radius[i] *= 2.0;
        buckets.for_each_within(sources[i], source_radius[i],
                                [&](int j) { connect(static_cast<int>(i), j); });
      }
      for (std::size_t j = 0; j < nt_count; ++j) {
        if (ns.unmet(static_cast<int>(ns_count + j)) == 0) continue;
        target_radius[j] *= 2.0;
        source_buckets.for_each_within(targets[j], target_radius[j],
                                       [&](int i) { connect(i, static_cast<int>(j)); });
      }
      continue;
    }
    if (status != SimplexStatus::kOptimal) {
      throw std::runtime_error("solve_geometric_transport: network simplex failed");
    }

    const std::vector<double> d = residual_potentials(ns);
    const double tol = options.tolerance * std::max(1.0, max_cost);

    // Pricing: the pair (i,j) violates the certificate iff
    // cost(i,j) < d[j] - d[i]; since d <= 0 this needs cost(i,j) < -d[i].
    // Only the most violated pairs of each source enter per round.
    std::size_t added = 0;
    std::vector<std::pair<double, int>> violated;
    for (std::size_t i = 0; i < ns_count; ++i) {
      const double di = d[i];
      const double budget = -di + tol;
      if (budget <= 0.0) continue;
      const double r = cost_kind == GroundCost::kEuclidean ? budget : std::sqrt(budget);
      violated.clear();
      buckets.for_each_within(sources[i], r, [&](int j) {
        const double dj = d[ns_count + static_cast<std::size_t>(j)];
        const double c =
            ground_cost(cost_kind, sources[i], targets[static_cast<std::size_t>(j)]);
        if (c + di - dj < -tol) violated.emplace_back(c + di - dj, j);
      });
      const std::size_t keep = std::min<std::size_t>(violated.size(), options.pricing_batch);
      std::partial_sort(violated.begin(), violated.begin() + static_cast<std::ptrdiff_t>(keep),
                        violated.end());
      for (std::size_t k = 0; k < keep; ++k) {
        const int j = violated[k].second;
        if (try_add(static_cast<int>(i), j,
                    ground_cost(cost_kind, sources[i], targets[static_cast<std::size_t>(j)]))) {
          ++added;
        }
      }
    }
    if (added > 0) continue;

    for (int e = 0; e < ns.arc_count(); ++e) {
      const std::int64_t f = ns.flow(e);
      if (f <= 0) continue;
      const int i = ns.arc_source(e);
      const int j = ns.arc_target(e) - static_cast<int>(ns_count);
      result.flows.push_back({i, j, f, ns.arc_cost(e)});
      result.total_cost += static_cast<double>(f) * ns.arc_cost(e);
    }
    std::sort(result.flows.begin(), result.flows.end(), [](const auto& a, const auto& b) {
      return std::pair(a.source, a.target) < std::pair(b.source, b.target);
    });
    for (std::size_t i = 0; i < ns_count; ++i) result.source_potential[i] = d[i];
    for (std::size_t j = 0; j < nt_count; ++j) result.target_potential[j] = d[ns_count + j];
    result.final_arc_count = arc_total;
    return result;
  }
}

}  // namespace dyadot
