#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace dyadot {

enum class SimplexStatus { kOptimal, kInfeasible, kIterationLimit };

/// Primal network simplex for uncapacitated min-cost flow with balanced
/// supplies (sum of supplies = 0, demands negative).
///
/// The spanning-tree bookkeeping (parent / thread / reverse thread /
/// successor counts) follows the classical strongly-feasible-tree scheme with
/// an artificial root, which rules out cycling under degeneracy. Entering
/// arcs are chosen by block search. Arc costs are doubles; `Flow` is either
/// an integer type (exact arithmetic) or double.
///
/// After run() returns kOptimal, potential() satisfies
///   cost(e) + potential(source) - potential(target) >= -tol
/// for every arc and equality on arcs carrying flow.
///
/// Arcs may be added after run(); the next run() continues from the current
/// basis instead of starting over.
template <typename Flow>
class NetworkSimplex {
  static_assert(std::is_arithmetic_v<Flow>);

 public:
  explicit NetworkSimplex(int node_count)
      : node_count_(node_count), supply_(static_cast<std::size_t>(node_count), Flow{0}) {
    if (node_count < 0) throw std::invalid_argument("NetworkSimplex: negative node count");
    // Slots [0, node_count) hold the artificial arcs.
    const std::size_t n = static_cast<std::size_t>(node_count);
    source_.assign(n, 0);
    target_.assign(n, 0);
    cost_.assign(n, 0.0);
  }

  void reserve_arcs(std::size_t n) {
    source_.reserve(n + supply_.size());
    target_.reserve(n + supply_.size());
    cost_.reserve(n + supply_.size());
  }

  int add_arc(int from, int to, double cost) {
    if (from < 0 || from >= node_count_ || to < 0 || to >= node_count_) {
      throw std::out_of_range("NetworkSimplex::add_arc: node index");
    }
    source_.push_back(from);
    target_.push_back(to);
    cost_.push_back(cost);
    if (started_) {
      flow_.push_back(Flow{0});
      state_.push_back(kLower);
    }
    return static_cast<int>(source_.size() - supply_.size()) - 1;
  }

  void set_supply(int node, Flow s) {
    if (started_) throw std::logic_error("NetworkSimplex::set_supply after run");
    supply_.at(static_cast<std::size_t>(node)) = s;
  }

  /// Cost of the artificial arcs. Must exceed (n+1) times any arc cost that
  /// will ever be added; by default derived from the arcs present at the
  /// first run().
  void set_artificial_cost(double c) { art_cost_override_ = c; }

  /// Relative tolerance on reduced costs when searching for entering arcs.
  void set_cost_tolerance(double tol) { cost_tol_ = tol; }
  void set_iteration_limit(std::int64_t limit) { iteration_limit_ = limit; }

  SimplexStatus run();

  int node_count() const { return node_count_; }
  int arc_count() const { return static_cast<int>(source_.size() - supply_.size()); }
  int arc_source(int e) const { return source_[slot(e)]; }
  int arc_target(int e) const { return target_[slot(e)]; }
  double arc_cost(int e) const { return cost_[slot(e)]; }
  Flow flow(int e) const { return flow_[slot(e)]; }
  double potential(int node) const { return pi_[static_cast<std::size_t>(node)]; }
  /// Pivots of the most recent run().
  std::int64_t iterations() const { return iterations_; }
  /// Flow left on the artificial arc of `node` (unmet supply or demand).
  Flow unmet(int node) const { return flow_[static_cast<std::size_t>(node)]; }

  /// Sum of cost * flow over real arcs.
  double total_cost() const {
    double total = 0.0;
    for (std::size_t e = supply_.size(); e < source_.size(); ++e) {
      if (flow_[e] != Flow{0}) total += cost_[e] * static_cast<double>(flow_[e]);
    }
    return total;
  }

 private:
  static constexpr signed char kLower = 1;
  static constexpr signed char kTree = 0;
  static constexpr signed char kUp = 1;
  static constexpr signed char kDown = -1;

  static bool is_zero(Flow v) {
    if constexpr (std::is_floating_point_v<Flow>) {
      return v == Flow{0};
    } else {
      return v == 0;
    }
  }

  void init();
  void set_search_range();
  void initial_pivots();
  bool find_entering_arc();
  void find_join_node();
  bool find_leaving_arc();
  void change_flow(bool change);
  void update_tree_structure();
  void update_potential();
  void pivot();

  std::size_t slot(int e) const { return supply_.size() + static_cast<std::size_t>(e); }

  double reduced_cost(std::size_t e) const {
    return cost_[e] + pi_[static_cast<std::size_t>(source_[e])] -
           pi_[static_cast<std::size_t>(target_[e])];
  }

  int node_count_;
  std::vector<Flow> supply_;
  std::vector<int> source_;
  std::vector<int> target_;
  std::vector<double> cost_;

  std::vector<Flow> flow_;
  std::vector<signed char> state_;
  std::vector<double> pi_;
  std::vector<int> parent_;
  std::vector<int> pred_;
  std::vector<int> thread_;
  std::vector<int> rev_thread_;
  std::vector<int> succ_num_;
  std::vector<int> last_succ_;
  std::vector<signed char> pred_dir_;
  std::vector<int> dirty_revs_;

  bool started_ = false;
  double art_cost_override_ = 0.0;
  double max_cost_ = 0.0;
  int root_ = 0;
  std::size_t search_arc_num_ = 0;
  std::size_t block_size_ = 0;
  std::size_t next_arc_ = 0;
  double art_cost_ = 0.0;
  double cost_tol_ = 1e-12;
  double min_reduced_ = 0.0;
  std::int64_t iteration_limit_ = std::numeric_limits<std::int64_t>::max();
  std::int64_t iterations_ = 0;

  // Pivot state.
  int in_arc_ = -1;
  int join_ = -1;
  int u_in_ = -1;
  int v_in_ = -1;
  int u_out_ = -1;
  int v_out_ = -1;
  Flow delta_{};
};

template <typename Flow>
void NetworkSimplex<Flow>::init() {
  const std::size_t n = static_cast<std::size_t>(node_count_);
  const std::size_t all_arcs = source_.size();
  root_ = node_count_;

  flow_.assign(all_arcs, Flow{0});
  state_.assign(all_arcs, kLower);
  pi_.assign(n + 1, 0.0);
  parent_.assign(n + 1, -1);
  pred_.assign(n + 1, -1);
  thread_.assign(n + 1, 0);
  rev_thread_.assign(n + 1, 0);
  succ_num_.assign(n + 1, 0);
  last_succ_.assign(n + 1, 0);
  pred_dir_.assign(n + 1, kUp);

  max_cost_ = 0.0;
  for (std::size_t e = n; e < all_arcs; ++e) max_cost_ = std::max(max_cost_, std::abs(cost_[e]));
  art_cost_ = art_cost_override_ > 0.0 ? art_cost_override_
                                       : (max_cost_ + 1.0) * static_cast<double>(n + 1);

  parent_[n] = -1;
  pred_[n] = -1;
  thread_[n] = 0;
  rev_thread_[0] = root_;
  succ_num_[n] = node_count_ + 1;
  last_succ_[n] = root_ - 1;
  pi_[n] = 0.0;

  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t e = u;
    parent_[u] = root_;
    pred_[u] = static_cast<int>(e);
    thread_[u] = static_cast<int>(u) + 1;
    rev_thread_[u + 1] = static_cast<int>(u);
    succ_num_[u] = 1;
    last_succ_[u] = static_cast<int>(u);
    state_[e] = kTree;
    if (supply_[u] >= Flow{0}) {
      pred_dir_[u] = kUp;
      pi_[u] = 0.0;
      source_[e] = static_cast<int>(u);
      target_[e] = root_;
      flow_[e] = supply_[u];
      cost_[e] = 0.0;
    } else {
      pred_dir_[u] = kDown;
      pi_[u] = art_cost_;
      source_[e] = root_;
      target_[e] = static_cast<int>(u);
      flow_[e] = -supply_[u];
      cost_[e] = art_cost_;
    }
  }

  next_arc_ = n;
  set_search_range();
}

template <typename Flow>
void NetworkSimplex<Flow>::set_search_range() {
  const std::size_t n = supply_.size();
  for (std::size_t e = n + search_arc_num_; e < source_.size(); ++e) {
    max_cost_ = std::max(max_cost_, std::abs(cost_[e]));
  }
  search_arc_num_ = source_.size() - n;
  block_size_ = std::max<std::size_t>(
      static_cast<std::size_t>(std::sqrt(static_cast<double>(search_arc_num_))), 10);
  if (next_arc_ < n || next_arc_ >= source_.size()) next_arc_ = n;
  min_reduced_ = -cost_tol_ * (max_cost_ + 1.0);
}

template <typename Flow>
bool NetworkSimplex<Flow>::find_entering_arc() {
  if (search_arc_num_ == 0) return false;
  const std::size_t first = supply_.size();
  const std::size_t end = source_.size();
  double best = 0.0;
  std::size_t cnt = block_size_;
  std::size_t e = next_arc_;
  for (std::size_t scanned = 0; scanned < search_arc_num_; ++scanned) {
    const double c = state_[e] * reduced_cost(e);
    if (c < best) {
      best = c;
      in_arc_ = static_cast<int>(e);
    }
    if (++e == end) e = first;
    if (--cnt == 0) {
      if (best < min_reduced_) {
        next_arc_ = e;
        return true;
      }
      cnt = block_size_;
    }
  }
  if (best < min_reduced_) {
    next_arc_ = e;
    return true;
  }
  return false;
}

template <typename Flow>
void NetworkSimplex<Flow>::find_join_node() {
  int u = source_[static_cast<std::size_t>(in_arc_)];
  int v = target_[static_cast<std::size_t>(in_arc_)];
  while (u != v) {
    if (succ_num_[static_cast<std::size_t>(u)] < succ_num_[static_cast<std::size_t>(v)]) {
      u = parent_[static_cast<std::size_t>(u)];
    } else {
      v = parent_[static_cast<std::size_t>(v)];
    }
  }
  join_ = u;
}

// Returns false when the entering arc itself is the blocking arc, which
// cannot happen for uncapacitated arcs; kept for symmetry with the capacitated
// formulation.
template <typename Flow>
bool NetworkSimplex<Flow>::find_leaving_arc() {
  const std::size_t ia = static_cast<std::size_t>(in_arc_);
  // Entering arcs are always at their lower bound here.
  const int first = source_[ia];
  const int second = target_[ia];
  bool have = false;
  int result = 0;
  for (int u = first; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
    const std::size_t su = static_cast<std::size_t>(u);
    if (pred_dir_[su] == kUp) {
      const Flow d = flow_[static_cast<std::size_t>(pred_[su])];
      if (!have || d < delta_) {
        delta_ = d;
        u_out_ = u;
        result = 1;
        have = true;
      }
    }
  }
  for (int u = second; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
    const std::size_t su = static_cast<std::size_t>(u);
    if (pred_dir_[su] == kDown) {
      const Flow d = flow_[static_cast<std::size_t>(pred_[su])];
      if (!have || d <= delta_) {
        delta_ = d;
        u_out_ = u;
        result = 2;
        have = true;
      }
    }
  }
  if (!have) {
    throw std::logic_error("NetworkSimplex: unbounded cycle (negative cost cycle)");
  }
  if (result == 1) {
    u_in_ = first;
    v_in_ = second;
  } else {
    u_in_ = second;
    v_in_ = first;
  }
  return true;
}

template <typename Flow>
void NetworkSimplex<Flow>::change_flow(bool change) {
  const std::size_t ia = static_cast<std::size_t>(in_arc_);
  if (delta_ > Flow{0}) {
    const Flow val = delta_;
    flow_[ia] += val;
    for (int u = source_[ia]; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
      const std::size_t su = static_cast<std::size_t>(u);
      flow_[static_cast<std::size_t>(pred_[su])] -= pred_dir_[su] * val;
    }
    for (int u = target_[ia]; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
      const std::size_t su = static_cast<std::size_t>(u);
      flow_[static_cast<std::size_t>(pred_[su])] += pred_dir_[su] * val;
    }
  }
  if (change) {
    state_[ia] = kTree;
    const std::size_t out = static_cast<std::size_t>(pred_[static_cast<std::size_t>(u_out_)]);
    state_[out] = kLower;
    // The blocking arc is at zero by construction; clear rounding residue.
    flow_[out] = Flow{0};
  }
}

template <typename Flow>
void NetworkSimplex<Flow>::update_tree_structure() {
  auto P = [this](int u) -> int& { return parent_[static_cast<std::size_t>(u)]; };
  auto T = [this](int u) -> int& { return thread_[static_cast<std::size_t>(u)]; };
  auto RT = [this](int u) -> int& { return rev_thread_[static_cast<std::size_t>(u)]; };
  auto SN = [this](int u) -> int& { return succ_num_[static_cast<std::size_t>(u)]; };
  auto LS = [this](int u) -> int& { return last_succ_[static_cast<std::size_t>(u)]; };

  const int old_rev_thread = RT(u_out_);
  const int old_succ_num = SN(u_out_);
  const int old_last_succ = LS(u_out_);
  v_out_ = P(u_out_);

  if (u_in_ == u_out_) {
    P(u_in_) = v_in_;
    pred_[static_cast<std::size_t>(u_in_)] = in_arc_;
    pred_dir_[static_cast<std::size_t>(u_in_)] =
        u_in_ == source_[static_cast<std::size_t>(in_arc_)] ? kUp : kDown;
    if (T(v_in_) != u_out_) {
      int after = T(old_last_succ);
      T(old_rev_thread) = after;
      RT(after) = old_rev_thread;
      after = T(v_in_);
      T(v_in_) = u_out_;
      RT(u_out_) = v_in_;
      T(old_last_succ) = after;
      RT(after) = old_last_succ;
    }
  } else {
    const int thread_continue = old_rev_thread == v_in_ ? T(old_last_succ) : T(v_in_);

    // Re-hang the stem u_in .. u_out under v_in, rewriting the thread order.
    int stem = u_in_;
    int par_stem = v_in_;
    int last = LS(u_in_);
    int after = T(last);
    T(v_in_) = u_in_;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in_);
    while (stem != u_out_) {
      const int next_stem = P(stem);
      T(last) = next_stem;
      dirty_revs_.push_back(last);

      const int before = RT(stem);
      T(before) = after;
      RT(after) = before;

      P(stem) = par_stem;
      par_stem = stem;
      stem = next_stem;

      last = LS(stem) == LS(par_stem) ? RT(par_stem) : LS(stem);
      after = T(last);
    }
    P(u_out_) = par_stem;
    T(last) = thread_continue;
    RT(thread_continue) = last;
    LS(u_out_) = last;

    if (old_rev_thread != v_in_) {
      T(old_rev_thread) = after;
      RT(after) = old_rev_thread;
    }

    for (int u : dirty_revs_) RT(T(u)) = u;

    int tmp_sc = 0;
    const int tmp_ls = LS(u_out_);
    for (int u = u_out_, p = P(u); u != u_in_; u = p, p = P(u)) {
      pred_[static_cast<std::size_t>(u)] = pred_[static_cast<std::size_t>(p)];
      pred_dir_[static_cast<std::size_t>(u)] =
          static_cast<signed char>(-pred_dir_[static_cast<std::size_t>(p)]);
      tmp_sc += SN(u) - SN(p);
      SN(u) = tmp_sc;
      LS(p) = tmp_ls;
    }
    pred_[static_cast<std::size_t>(u_in_)] = in_arc_;
    pred_dir_[static_cast<std::size_t>(u_in_)] =
        u_in_ == source_[static_cast<std::size_t>(in_arc_)] ? kUp : kDown;
    SN(u_in_) = old_succ_num;
  }

  const int up_limit_out = LS(join_) == v_in_ ? join_ : -1;
  const int last_succ_out = LS(u_out_);
  for (int u = v_in_; u != -1 && LS(u) == v_in_; u = P(u)) LS(u) = last_succ_out;

  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (int u = v_out_; u != up_limit_out && LS(u) == old_last_succ; u = P(u)) {
      LS(u) = old_rev_thread;
    }
  } else if (last_succ_out != old_last_succ) {
    for (int u = v_out_; u != up_limit_out && LS(u) == old_last_succ; u = P(u)) {
      LS(u) = last_succ_out;
    }
  }

  for (int u = v_in_; u != join_; u = P(u)) SN(u) += old_succ_num;
  for (int u = v_out_; u != join_; u = P(u)) SN(u) -= old_succ_num;
}

template <typename Flow>
void NetworkSimplex<Flow>::update_potential() {
  const std::size_t ui = static_cast<std::size_t>(u_in_);
  const double sigma = pi_[static_cast<std::size_t>(v_in_)] - pi_[ui] -
                       pred_dir_[ui] * cost_[static_cast<std::size_t>(in_arc_)];
  const int end = thread_[static_cast<std::size_t>(last_succ_[ui])];
  for (int u = u_in_; u != end; u = thread_[static_cast<std::size_t>(u)]) {
    pi_[static_cast<std::size_t>(u)] += sigma;
  }
}

template <typename Flow>
void NetworkSimplex<Flow>::pivot() {
  find_join_node();
  const bool change = find_leaving_arc();
  change_flow(change);
  if (change) {
    update_tree_structure();
    update_potential();
  }
}

// Cheapest incoming arc of every demand node enters first; this removes most
// artificial arcs from the tree before block search starts.
template <typename Flow>
void NetworkSimplex<Flow>::initial_pivots() {
  std::vector<int> best(static_cast<std::size_t>(node_count_), -1);
  for (std::size_t e = supply_.size(); e < source_.size(); ++e) {
    const std::size_t v = static_cast<std::size_t>(target_[e]);
    if (supply_[v] >= Flow{0}) continue;
    if (best[v] < 0 || cost_[e] < cost_[static_cast<std::size_t>(best[v])]) {
      best[v] = static_cast<int>(e);
    }
  }
  for (int e : best) {
    if (e < 0) continue;
    const std::size_t se = static_cast<std::size_t>(e);
    if (state_[se] * reduced_cost(se) >= min_reduced_) continue;
    in_arc_ = e;
    pivot();
  }
}

template <typename Flow>
SimplexStatus NetworkSimplex<Flow>::run() {
  Flow total{0};
  for (Flow s : supply_) total += s;
  if constexpr (std::is_floating_point_v<Flow>) {
    Flow scale{0};
    for (Flow s : supply_) scale += std::abs(s);
    if (std::abs(total) > 1e-9 * std::max<Flow>(scale, Flow{1})) {
      throw std::invalid_argument("NetworkSimplex: supplies do not balance");
    }
  } else {
    if (total != 0) throw std::invalid_argument("NetworkSimplex: supplies do not balance");
  }
  iterations_ = 0;
  if (!started_) {
    init();
    started_ = true;
    initial_pivots();
  } else {
    set_search_range();
  }
  SimplexStatus status = SimplexStatus::kOptimal;
  while (find_entering_arc()) {
    if (++iterations_ > iteration_limit_) {
      status = SimplexStatus::kIterationLimit;
      break;
    }
    pivot();
  }
  if (status == SimplexStatus::kOptimal) {
    Flow art_total{0};
    Flow scale{0};
    for (std::size_t e = 0; e < supply_.size(); ++e) art_total += flow_[e];
    for (Flow s : supply_) scale += s > Flow{0} ? s : Flow{0};
    bool feasible;
    if constexpr (std::is_floating_point_v<Flow>) {
      feasible = art_total <= 1e-9 * std::max<Flow>(scale, Flow{1});
    } else {
      feasible = art_total == 0;
    }
    if (!feasible) status = SimplexStatus::kInfeasible;
  }
  return status;
}

}  // namespace dyadot
