#include "dyadot/witness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dyadot {

namespace {

struct Builder {
  const DyadicTree& tree;
  const Mask& mask;
  std::int64_t R;
  double M;
  double h;
  double log_r;
  std::int64_t m;  // cells per side
  std::vector<double> acc_x;
  std::vector<double> acc_y;
  // Mask gradient at the cell centres of a cube, per level, unscaled by side.
  std::vector<std::vector<std::array<double, 2>>> tables;
  std::vector<FamilyCube> family;
  double exceptional_area = 0.0;
  double hessian_bound = 0.0;

  const std::vector<std::array<double, 2>>& table(const DyadicCube& Q) {
    auto& t = tables[static_cast<std::size_t>(Q.level())];
    if (t.empty()) {
      const std::int64_t k = static_cast<std::int64_t>(std::llround(static_cast<double>(Q.side) / h));
      t.resize(static_cast<std::size_t>(k * k));
      for (std::int64_t b = 0; b < k; ++b) {
        for (std::int64_t a = 0; a < k; ++a) {
          t[static_cast<std::size_t>(b * k + a)] =
              mask.gradient({(static_cast<double>(a) + 0.5) / static_cast<double>(k),
                             (static_cast<double>(b) + 0.5) / static_cast<double>(k)});
        }
      }
    }
    return t;
  }

  double threshold(const DyadicCube& Q) const { return M * Q.area() * log_r; }

  template <typename F>
  void for_cells(const DyadicCube& Q, F&& f) {
    const std::int64_t k = static_cast<std::int64_t>(std::llround(static_cast<double>(Q.side) / h));
    const auto& t = table(Q);
    const double inv = 1.0 / static_cast<double>(Q.side);
    for (std::int64_t b = 0; b < k; ++b) {
      const std::size_t row = static_cast<std::size_t>((Q.j * k + b) * m + Q.i * k);
      for (std::int64_t a = 0; a < k; ++a) {
        const auto& g = t[static_cast<std::size_t>(b * k + a)];
        f(row + static_cast<std::size_t>(a), g[0] * inv, g[1] * inv);
      }
    }
  }

  bool passes(const DyadicCube& Q, std::int64_t N) {
    const double thr = threshold(Q);
    const double n = static_cast<double>(N);
    if (n * n > thr) return false;
    // The energy test is measured in units of the mask's own energy.
    const double energy_thr = thr * kMaskDirichletEnergy;
    double energy = 0.0;
    for_cells(Q, [&](std::size_t c, double gx, double gy) {
      const double vx = acc_x[c] + n * gx;
      const double vy = acc_y[c] + n * gy;
      energy += vx * vx + vy * vy;
    });
    return energy * h * h <= energy_thr;
  }

  void add_term(const DyadicCube& Q, std::int64_t N) {
    const double n = static_cast<double>(N);
    for_cells(Q, [&](std::size_t c, double gx, double gy) {
      acc_x[c] += n * gx;
      acc_y[c] += n * gy;
    });
  }

  // Q is in the family with its term already accumulated. Children are
  // disjoint, so after a subtree is finished its cells are never read again
  // and the accumulator needs no rollback.
  void descend(const DyadicCube& Q, std::int64_t N, double chain) {
    chain += std::abs(static_cast<double>(N)) * kMaskHessianBound / Q.area();
    FamilyCube fc{Q, N, false, false};
    bool subdivide = Q.side > 1;
    std::vector<DyadicCube> kids;
    std::array<std::int64_t, 4> kid_n{};
    if (subdivide) {
      kids = Q.children();
      for (std::size_t c = 0; c < 4 && subdivide; ++c) {
        kid_n[c] = tree.signed_count(kids[c]);
        subdivide = passes(kids[c], kid_n[c]);
      }
    }
    if (!subdivide) {
      fc.leaf = true;
      fc.exceptional = Q.side > 1;
      if (fc.exceptional) exceptional_area += Q.area();
      hessian_bound = std::max(hessian_bound, chain);
      family.push_back(fc);
      return;
    }
    family.push_back(fc);
    for (std::size_t c = 0; c < 4; ++c) add_term(kids[c], kid_n[c]);
    for (std::size_t c = 0; c < 4; ++c) descend(kids[c], kid_n[c], chain);
  }
};

}  // namespace

int WitnessField::find(const DyadicCube& Q) const {
  return index_[static_cast<std::size_t>(Q.level())]
               [static_cast<std::size_t>(Q.j * (R_ / Q.side) + Q.i)];
}

double WitnessField::value(const Point& x) const {
  if (family_.empty()) return 0.0;
  double v = 0.0;
  const Point rel{x.x - origin_.x, x.y - origin_.y};
  if (!(rel.x >= 0.0 && rel.y >= 0.0 && rel.x <= static_cast<double>(R_) &&
        rel.y <= static_cast<double>(R_))) {
    return 0.0;
  }
  for (std::int64_t side = R_; side >= 1; side /= 2) {
    const std::int64_t k = R_ / side;
    const auto idx = [&](double t) {
      return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(t / static_cast<double>(side))), 0, k - 1);
    };
    const int f = find(DyadicCube(R_, side, idx(rel.x), idx(rel.y)));
    if (f < 0) break;
    const FamilyCube& fc = family_[static_cast<std::size_t>(f)];
    v += static_cast<double>(fc.N_Q) * CubeMask(mask_, fc.cube).value(rel);
    if (fc.leaf) break;
  }
  return v;
}

std::array<double, 2> WitnessField::gradient(const Point& x) const {
  std::array<double, 2> g{0.0, 0.0};
  if (family_.empty()) return g;
  const Point rel{x.x - origin_.x, x.y - origin_.y};
  if (!(rel.x >= 0.0 && rel.y >= 0.0 && rel.x <= static_cast<double>(R_) &&
        rel.y <= static_cast<double>(R_))) {
    return g;
  }
  for (std::int64_t side = R_; side >= 1; side /= 2) {
    const std::int64_t k = R_ / side;
    const auto idx = [&](double t) {
      return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(t / static_cast<double>(side))), 0, k - 1);
    };
    const int f = find(DyadicCube(R_, side, idx(rel.x), idx(rel.y)));
    if (f < 0) break;
    const FamilyCube& fc = family_[static_cast<std::size_t>(f)];
    const auto gq = CubeMask(mask_, fc.cube).gradient(rel);
    g[0] += static_cast<double>(fc.N_Q) * gq[0];
    g[1] += static_cast<double>(fc.N_Q) * gq[1];
    if (fc.leaf) break;
  }
  return g;
}

double WitnessField::chain_hessian(const Point& x) const {
  double total = 0.0;
  if (family_.empty()) return total;
  const Point rel{x.x - origin_.x, x.y - origin_.y};
  for (std::int64_t side = R_; side >= 1; side /= 2) {
    const std::int64_t k = R_ / side;
    const auto idx = [&](double t) {
      return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(t / static_cast<double>(side))), 0, k - 1);
    };
    const int f = find(DyadicCube(R_, side, idx(rel.x), idx(rel.y)));
    if (f < 0) break;
    const FamilyCube& fc = family_[static_cast<std::size_t>(f)];
    total += std::abs(static_cast<double>(fc.N_Q)) * kMaskHessianBound / fc.cube.area();
    if (fc.leaf) break;
  }
  return total;
}

void WitnessField::write_jsonl(std::ostream& out) const {
  char line[192];
  for (const FamilyCube& fc : family_) {
    std::snprintf(line, sizeof line,
                  "{\"level\":%d,\"side\":%lld,\"i\":%lld,\"j\":%lld,\"N_Q\":%lld,"
                  "\"leaf\":%s,\"stopped\":%s}\n",
                  fc.cube.level(), static_cast<long long>(fc.cube.side),
                  static_cast<long long>(fc.cube.i), static_cast<long long>(fc.cube.j),
                  static_cast<long long>(fc.N_Q), fc.leaf ? "true" : "false",
                  fc.exceptional ? "true" : "false");
    out << line;
  }
}

WitnessField build_witness(const PointSet& mu, std::int64_t R, double M, double h) {
  if (R < 2 || !is_power_of_two(R)) {
    throw std::invalid_argument("build_witness: R must be a power of two >= 2");
  }
  if (!(M > 0.0)) throw std::invalid_argument("build_witness: M must be positive");
  const double cells_half = 0.5 / h;
  if (!(h > 0.0) || h > 0.25 || std::abs(cells_half - std::round(cells_half)) > 1e-12) {
    throw std::invalid_argument("build_witness: h must divide 1/2 and be at most 1/4");
  }
  if (mu.box().width() != static_cast<double>(R) || mu.box().height() != static_cast<double>(R)) {
    throw std::invalid_argument("build_witness: point set box must be the square of side R");
  }

  const DyadicTree tree(mu);
  const Mask mask = make_mask();
  WitnessField w;
  w.R_ = R;
  w.M_ = M;
  w.h_ = h;
  w.origin_ = tree.origin();
  w.mask_ = mask;

  const std::int64_t m = std::llround(static_cast<double>(R) / h);
  Builder b{tree, mask, R, M, h, std::log(static_cast<double>(R)), m,
            std::vector<double>(static_cast<std::size_t>(m * m), 0.0),
            std::vector<double>(static_cast<std::size_t>(m * m), 0.0),
            std::vector<std::vector<std::array<double, 2>>>(static_cast<std::size_t>(tree.depth())),
            {}, 0.0, 0.0};
  const DyadicCube root = DyadicCube::root(R);
  const std::int64_t n_root = tree.signed_count(root);
  if (b.passes(root, n_root)) {
    b.add_term(root, n_root);
    b.descend(root, n_root, 0.0);
  } else {
    w.root_rejected_ = true;
    b.exceptional_area = root.area();
  }

  w.family_ = std::move(b.family);
  std::sort(w.family_.begin(), w.family_.end(), [](const FamilyCube& a, const FamilyCube& c) {
    const int la = a.cube.level();
    const int lc = c.cube.level();
    if (la != lc) return la < lc;
    return std::pair(a.cube.j, a.cube.i) < std::pair(c.cube.j, c.cube.i);
  });
  w.index_.resize(static_cast<std::size_t>(tree.depth()));
  for (int lev = 0; lev < tree.depth(); ++lev) {
    const std::int64_t k = std::int64_t{1} << lev;
    w.index_[static_cast<std::size_t>(lev)].assign(static_cast<std::size_t>(k * k), -1);
  }
  for (std::size_t f = 0; f < w.family_.size(); ++f) {
    const DyadicCube& q = w.family_[f].cube;
    w.index_[static_cast<std::size_t>(q.level())]
            [static_cast<std::size_t>(q.j * (R / q.side) + q.i)] = static_cast<int>(f);
  }
  w.exceptional_area_ = b.exceptional_area;
  w.hessian_bound_ = b.hessian_bound;

  // Node samples.
  const std::int64_t n = m + 1;
  w.nodes_ = n;
  w.zeta_.assign(static_cast<std::size_t>(n * n), 0.0);
  w.gx_.assign(w.zeta_.size(), 0.0);
  w.gy_.assign(w.zeta_.size(), 0.0);
  double integral = 0.0;
  for (std::int64_t bj = 0; bj < n; ++bj) {
    for (std::int64_t ai = 0; ai < n; ++ai) {
      const Point x{w.origin_.x + static_cast<double>(ai) * h,
                    w.origin_.y + static_cast<double>(bj) * h};
      const std::size_t s = static_cast<std::size_t>(bj * n + ai);
      const double v = w.value(x);
      const auto g = w.gradient(x);
      w.zeta_[s] = v;
      w.gx_[s] = g[0];
      w.gy_[s] = g[1];
      w.grid_grad_max_ = std::max(w.grid_grad_max_, std::hypot(g[0], g[1]));
      const bool edge_x = ai == 0 || ai == n - 1;
      const bool edge_y = bj == 0 || bj == n - 1;
      integral += (edge_x ? 0.5 : 1.0) * (edge_y ? 0.5 : 1.0) * v;
      if (edge_x || edge_y) w.boundary_max_ = std::max(w.boundary_max_, std::abs(v));
    }
  }
  w.integral_ = integral * h * h;

  // Branch and bound for sup |grad zeta|. Every point of a square cell of
  // side a is within a/sqrt(2) of a corner, and inside the cell the Hessian
  // norm is at most the chain bound of the family cubes containing it (cells
  // never straddle a unit cube). A cell whose bound exceeds the best sampled
  // gradient by more than kCertificateSlack is split into four.
  constexpr double kCertificateSlack = 0.02;
  constexpr int kMaxSplits = 10;
  struct Cell {
    double x0, y0, a, corner, hess;
    int depth;
  };
  double best = w.grid_grad_max_;
  auto grad_norm = [&](double x, double y) {
    const auto g = w.gradient({x, y});
    const double v = std::hypot(g[0], g[1]);
    best = std::max(best, v);
    return v;
  };
  std::vector<Cell> stack;
  double certificate = 0.0;
  for (std::int64_t bj = 0; bj < m; ++bj) {
    for (std::int64_t ai = 0; ai < m; ++ai) {
      double corner = 0.0;
      for (std::int64_t dj = 0; dj < 2; ++dj) {
        for (std::int64_t di = 0; di < 2; ++di) {
          const std::size_t s = static_cast<std::size_t>((bj + dj) * n + ai + di);
          corner = std::max(corner, std::hypot(w.gx_[s], w.gy_[s]));
        }
      }
      const double x0 = w.origin_.x + static_cast<double>(ai) * h;
      const double y0 = w.origin_.y + static_cast<double>(bj) * h;
      const double hess = w.chain_hessian({x0 + 0.5 * h, y0 + 0.5 * h});
      stack.push_back({x0, y0, h, corner, hess, 0});
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        const double bound = c.corner + c.a / std::sqrt(2.0) * c.hess;
        if (bound <= (1.0 + kCertificateSlack) * best || c.depth >= kMaxSplits) {
          certificate = std::max(certificate, bound);
          continue;
        }
        const double half = 0.5 * c.a;
        for (int q = 0; q < 4; ++q) {
          const double sx = c.x0 + (q % 2) * half;
          const double sy = c.y0 + (q / 2) * half;
          const double sub = std::max({grad_norm(sx, sy), grad_norm(sx + half, sy),
                                       grad_norm(sx, sy + half),
                                       grad_norm(sx + half, sy + half)});
          stack.push_back({sx, sy, half, sub, c.hess, c.depth + 1});
        }
      }
    }
  }
  w.lipschitz_ = certificate;
  return w;
}

WitnessValue witness_value(const WitnessField& w, const PointSet& mu, const PointSet& nu) {
  const double R = static_cast<double>(w.R());
  for (const PointSet* ps : {&mu, &nu}) {
    if (ps->box().width() != R || ps->box().height() != R) {
      throw std::invalid_argument("witness_value: point set box does not match the witness");
    }
  }
  WitnessValue v;
  double over_mu = 0.0;
  double over_nu = 0.0;
  for (const Point& x : mu) over_mu += w.value(x);
  for (const Point& y : nu) over_nu += w.value(y);
  v.raw = over_mu - over_nu;
  v.lipschitz = w.lipschitz();
  v.normalized = v.lipschitz > 0.0 ? v.raw / v.lipschitz : 0.0;
  return v;
}

std::vector<LowerBoundRecord> lower_bound_scan(const std::vector<std::int64_t>& Rs,
                                               std::int64_t seeds, double M, double h,
                                               std::uint64_t master_seed) {
  std::vector<LowerBoundRecord> out;
  for (std::int64_t R : Rs) {
    const Box box = Box::square(static_cast<double>(R));
    for (std::int64_t s = 0; s < seeds; ++s) {
      const RngStream base = replicate_stream(master_seed, R, s);
      RngStream mu_rng = base.split("mu");
      RngStream nu_rng = base.split("nu");
      const PointSet mu = sample_poisson(box, 1.0, mu_rng);
      const PointSet nu = sample_uniform_n(box, static_cast<std::int64_t>(mu.size()), nu_rng);
      const WitnessField w = build_witness(mu, R, M, h);
      out.push_back({R, s, mu.size(), witness_value(w, mu, nu), w.exceptional_area()});
    }
  }
  return out;
}

}  // namespace dyadot
