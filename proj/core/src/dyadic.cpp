#include "dyadot/dyadic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dyadot {

bool is_power_of_two(std::int64_t v) {
  return v > 0 && std::has_single_bit(static_cast<std::uint64_t>(v));
}

DyadicCube::DyadicCube(std::int64_t root, std::int64_t side_, std::int64_t i_,
                       std::int64_t j_)
    : R(root), side(side_), i(i_), j(j_) {
  if (!is_power_of_two(R) || !is_power_of_two(side) || side > R) {
    throw std::invalid_argument("DyadicCube: sides must be powers of two with side <= R");
  }
  const std::int64_t k = R / side;
  if (i < 0 || j < 0 || i >= k || j >= k) {
    throw std::invalid_argument("DyadicCube: index outside the root");
  }
}

Box DyadicCube::box(const Point& origin) const {
  const double s = static_cast<double>(side);
  return Box(origin.x + static_cast<double>(i) * s, origin.y + static_cast<double>(j) * s,
             origin.x + static_cast<double>(i + 1) * s,
             origin.y + static_cast<double>(j + 1) * s);
}

int DyadicCube::level() const {
  return std::countr_zero(static_cast<std::uint64_t>(R)) -
         std::countr_zero(static_cast<std::uint64_t>(side));
}

std::vector<DyadicCube> DyadicCube::children() const {
  if (side == 1) return {};
  const std::int64_t s = side / 2;
  return {DyadicCube(R, s, 2 * i, 2 * j), DyadicCube(R, s, 2 * i + 1, 2 * j),
          DyadicCube(R, s, 2 * i, 2 * j + 1), DyadicCube(R, s, 2 * i + 1, 2 * j + 1)};
}

CubeStats cube_stats(const PointSet& ps, const DyadicCube& Q) {
  const Point origin{ps.box().x0, ps.box().y0};
  const Box box = Q.box(origin);
  if (!ps.box().contains(box)) throw std::invalid_argument("cube_stats: cube outside the box");
  const double mid = 0.5 * (box.x0 + box.x1);
  CubeStats s;
  for (const Point& p : ps) {
    if (!box.contains(p)) continue;
    ++s.mu_count;
    s.N_Q += p.x >= mid ? 1 : -1;
  }
  s.n_Q = static_cast<double>(s.mu_count) / Q.area();
  return s;
}

DyadicTree::DyadicTree(const PointSet& ps) {
  const Box& box = ps.box();
  const double side = box.width();
  if (box.height() != side || side != std::floor(side) ||
      !is_power_of_two(static_cast<std::int64_t>(side))) {
    throw std::invalid_argument("DyadicTree: box must be a square of power-of-two side");
  }
  R_ = static_cast<std::int64_t>(side);
  origin_ = {box.x0, box.y0};
  const int levels = std::countr_zero(static_cast<std::uint64_t>(R_)) + 1;
  count_.resize(static_cast<std::size_t>(levels));
  signed_.resize(static_cast<std::size_t>(levels));

  // Finest level: unit cells, N_Q from the half-cell bins.
  auto& c0 = count_.back();
  auto& s0 = signed_.back();
  c0.assign(static_cast<std::size_t>(R_ * R_), 0);
  s0.assign(static_cast<std::size_t>(R_ * R_), 0);
  for (const Point& p : ps) {
    const std::int64_t hx =
        std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(2.0 * (p.x - origin_.x))),
                                 0, 2 * R_ - 1);
    const std::int64_t iy = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor(p.y - origin_.y)), 0, R_ - 1);
    const std::size_t k = static_cast<std::size_t>(iy * R_ + hx / 2);
    ++c0[k];
    s0[k] += (hx % 2 == 1) ? 1 : -1;
  }

  for (int lev = levels - 2; lev >= 0; --lev) {
    const std::int64_t k = std::int64_t{1} << lev;
    const auto& fc = count_[static_cast<std::size_t>(lev) + 1];
    auto& cc = count_[static_cast<std::size_t>(lev)];
    auto& sc = signed_[static_cast<std::size_t>(lev)];
    cc.assign(static_cast<std::size_t>(k * k), 0);
    sc.assign(static_cast<std::size_t>(k * k), 0);
    for (std::int64_t j = 0; j < k; ++j) {
      for (std::int64_t i = 0; i < k; ++i) {
        const auto at = [&](std::int64_t ci, std::int64_t cj) {
          return fc[static_cast<std::size_t>(cj * 2 * k + ci)];
        };
        const std::int64_t ll = at(2 * i, 2 * j);
        const std::int64_t lr = at(2 * i + 1, 2 * j);
        const std::int64_t ul = at(2 * i, 2 * j + 1);
        const std::int64_t ur = at(2 * i + 1, 2 * j + 1);
        const std::size_t slot_ij = static_cast<std::size_t>(j * k + i);
        cc[slot_ij] = ll + lr + ul + ur;
        sc[slot_ij] = (lr + ur) - (ll + ul);
      }
    }
  }
}

std::size_t DyadicTree::slot(const DyadicCube& Q) const {
  if (Q.R != R_) throw std::invalid_argument("DyadicTree: cube belongs to another root");
  return static_cast<std::size_t>(Q.j * (R_ / Q.side) + Q.i);
}

std::int64_t DyadicTree::count(const DyadicCube& Q) const {
  return count_[static_cast<std::size_t>(Q.level())][slot(Q)];
}

std::int64_t DyadicTree::signed_count(const DyadicCube& Q) const {
  return signed_[static_cast<std::size_t>(Q.level())][slot(Q)];
}

double DyadicTree::density(const DyadicCube& Q) const {
  return static_cast<double>(count(Q)) / Q.area();
}

CubeStats DyadicTree::stats(const DyadicCube& Q) const {
  CubeStats s;
  s.mu_count = count(Q);
  s.n_Q = static_cast<double>(s.mu_count) / Q.area();
  s.N_Q = signed_count(Q);
  return s;
}

DyadicCube DyadicTree::cube_at(const Point& x, std::int64_t side) const {
  const std::int64_t k = R_ / side;
  const auto index = [&](double t) {
    return std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor(t / static_cast<double>(side))), 0, k - 1);
  };
  return DyadicCube(R_, side, index(x.x - origin_.x), index(x.y - origin_.y));
}

void DyadicTree::write_jsonl(std::ostream& out) const {
  char line[192];
  for (int lev = 0; lev < depth(); ++lev) {
    const std::int64_t k = std::int64_t{1} << lev;
    const std::int64_t side = R_ / k;
    for (std::int64_t j = 0; j < k; ++j) {
      for (std::int64_t i = 0; i < k; ++i) {
        const std::size_t s = static_cast<std::size_t>(j * k + i);
        const std::int64_t c = count_[static_cast<std::size_t>(lev)][s];
        std::snprintf(line, sizeof line,
                      "{\"level\":%d,\"side\":%lld,\"i\":%lld,\"j\":%lld,\"count\":%lld,"
                      "\"n_Q\":%.17g,\"N_Q\":%lld}\n",
                      lev, static_cast<long long>(side), static_cast<long long>(i),
                      static_cast<long long>(j), static_cast<long long>(c),
                      static_cast<double>(c) / static_cast<double>(side * side),
                      static_cast<long long>(signed_[static_cast<std::size_t>(lev)][s]));
        out << line;
      }
    }
  }
}

StoppingScale stopping_scale(const DyadicTree& tree, const Point& x) {
  StoppingScale s;
  const std::int64_t R = tree.R();
  if (!density_in_range(tree.density(DyadicCube::root(R)))) {
    s.exceeds_root = true;
    s.r_star = 2.0 * static_cast<double>(R);
    return s;
  }
  for (std::int64_t side = R / 2; side >= 1; side /= 2) {
    if (!density_in_range(tree.density(tree.cube_at(x, side)))) {
      s.r_star = 2.0 * static_cast<double>(side);
      return s;
    }
  }
  return s;
}

StoppingScale stopping_scale(const PointSet& ps, const Point& x) {
  if (!ps.box().contains(x)) throw std::invalid_argument("stopping_scale: x outside the box");
  return stopping_scale(DyadicTree(ps), x);
}

std::int64_t StoppedPartition::side_at(const Point& x) const {
  if (overflow) return 0;
  const Point rel{x.x - origin.x, x.y - origin.y};
  for (const DyadicCube& q : cubes) {
    if (q.box().contains(rel)) return q.side;
  }
  return 0;
}

namespace {

void subdivide(const DyadicTree& tree, const DyadicCube& Q, std::vector<DyadicCube>& out) {
  if (Q.side == 1) {
    out.push_back(Q);
    return;
  }
  const auto kids = Q.children();
  const bool child_out = std::any_of(kids.begin(), kids.end(), [&](const DyadicCube& c) {
    return !density_in_range(tree.density(c));
  });
  if (child_out) {
    out.push_back(Q);
    return;
  }
  for (const auto& c : kids) subdivide(tree, c, out);
}

}  // namespace

StoppedPartition build_partition(const DyadicTree& tree) {
  StoppedPartition p;
  p.R = tree.R();
  p.origin = tree.origin();
  const DyadicCube root = DyadicCube::root(tree.R());
  if (!density_in_range(tree.density(root))) {
    p.overflow = true;
    return p;
  }
  // Every cube reached here is in range: the root by the check above, and
  // children only when none of them is out of range.
  subdivide(tree, root, p.cubes);
  std::sort(p.cubes.begin(), p.cubes.end());
  return p;
}

StoppedPartition build_partition(const PointSet& ps) { return build_partition(DyadicTree(ps)); }

MomentEstimate r_star_fourth_moment(double intensity, std::int64_t R,
                                    std::int64_t replicates, RngStream& rng) {
  if (replicates < 1) throw std::invalid_argument("r_star_fourth_moment: replicates >= 1");
  if (!is_power_of_two(R)) throw std::invalid_argument("r_star_fourth_moment: R power of 2");
  const Box box = Box::square(static_cast<double>(R));
  const Point centre = box.center();
  MomentEstimate est;
  est.replicates = replicates;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::int64_t k = 0; k < replicates; ++k) {
    RngStream stream = rng.split("replicate-" + std::to_string(k));
    const PointSet ps = sample_poisson(box, intensity, stream);
    const StoppingScale s = stopping_scale(DyadicTree(ps), centre);
    if (s.exceeds_root) ++est.overflows;
    const double v = std::pow(s.r_star, 4);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(replicates);
  est.mean = sum / n;
  if (replicates > 1) {
    const double var = std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  }
  return est;
}

}  // namespace dyadot
