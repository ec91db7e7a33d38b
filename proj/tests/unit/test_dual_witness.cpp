#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dyadot/assignment.hpp"
#include "dyadot/mask.hpp"
#include "dyadot/witness.hpp"

using namespace dyadot;

namespace {

constexpr double kNoStop = 1e9;

PointSet poisson(std::int64_t R, RngStream& r) {
  return sample_poisson(Box::square(static_cast<double>(R)), 1.0, r);
}

// Midpoint quadrature of f over [x0,x0+w] x [y0,y0+ht] with n cells per side.
template <class F>
double integrate(F f, double x0, double y0, double w, double ht, int n) {
  const double hx = w / n;
  const double hy = ht / n;
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) s += f(Point{x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy});
  }
  return s * hx * hy;
}

}  // namespace

TEST_SUITE("dual_witness") {

TEST_CASE("mask integrals and constants") {
  const Mask m = make_mask();
  CHECK(std::abs(integrate([&](Point x) { return m.value(x); }, 0, 0, 1, 1, 512)) < 1e-12);
  const double right = integrate([&](Point x) { return m.value(x); }, 0.5, 0, 0.5, 1, 512);
  const double left = integrate([&](Point x) { return m.value(x); }, 0, 0, 0.5, 1, 512);
  CHECK(right - left == doctest::Approx(1.0).epsilon(1e-5));

  double sup = 0.0;
  double energy = 0.0;
  const int n = 1024;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto g = m.gradient({(i + 0.5) / n, (j + 0.5) / n});
      sup = std::max(sup, std::hypot(g[0], g[1]));
      energy += (g[0] * g[0] + g[1] * g[1]) / (double(n) * n);
    }
  }
  CHECK(sup == doctest::Approx(68.3582).epsilon(1e-5));
  CHECK(sup <= kMaskGradientSup);
  CHECK(energy == doctest::Approx(kMaskDirichletEnergy).epsilon(1e-4));
  CHECK(kMaskDirichletEnergy == doctest::Approx(403.388).epsilon(1e-6));

  // Zero outside the support and on its edge.
  CHECK(m.value({0.05, 0.5}) == 0.0);
  CHECK(m.value({0.5, 0.95}) == 0.0);
  CHECK(m.value({0.9, 0.5}) == 0.0);
  // Gradient against central differences.
  const Point p{0.63, 0.41};
  const double e = 1e-6;
  const auto g = m.gradient(p);
  CHECK(g[0] == doctest::Approx((m.value({p.x + e, p.y}) - m.value({p.x - e, p.y})) / (2 * e)).epsilon(1e-6));
  CHECK(g[1] == doctest::Approx((m.value({p.x, p.y + e}) - m.value({p.x, p.y - e})) / (2 * e)).epsilon(1e-6));
  const auto hs = m.hessian(p);
  const auto gx = m.gradient({p.x + e, p.y});
  const auto gm = m.gradient({p.x - e, p.y});
  CHECK(hs[0] == doctest::Approx((gx[0] - gm[0]) / (2 * e)).epsilon(1e-5));
  CHECK(hs[1] == doctest::Approx((gx[1] - gm[1]) / (2 * e)).epsilon(1e-5));
}

TEST_CASE("rescaled masks") {
  const Mask m = make_mask();
  const CubeMask unit = rescale_to_cube(m, DyadicCube(4, 1, 0, 0));
  for (Point p : {Point{0.3, 0.6}, Point{0.71, 0.2}}) {
    CHECK(unit.value(p) == m.value(p));
    CHECK(unit.gradient(p) == m.gradient(p));
  }
  const CubeMask two = rescale_to_cube(m, DyadicCube(4, 2, 1, 0));
  CHECK(two.side() == 2.0);
  double sup = 0.0;
  for (int j = 0; j < 512; ++j) {
    for (int i = 0; i < 512; ++i) {
      const auto g = two.gradient({2.0 + 2.0 * (i + 0.5) / 512, 2.0 * (j + 0.5) / 512});
      sup = std::max(sup, std::hypot(g[0], g[1]));
    }
  }
  CHECK(sup == doctest::Approx(kMaskGradientSup / 2).epsilon(2e-3));
  CHECK(two.value({2.9, 0.6}) == doctest::Approx(m.value({0.45, 0.3})).epsilon(1e-14));
  CHECK(two.value({1.0, 1.0}) == 0.0);
  const CubeMask big = rescale_to_cube(m, DyadicCube(16, 8, 1, 1), {3.0, -1.0});
  CHECK(std::abs(integrate([&](Point x) { return big.value(x); }, 11, 7, 8, 8, 400)) < 1e-8 * 64);
}

TEST_CASE("empty mu gives a zero field") {
  const WitnessField w = build_witness(PointSet(Box::square(16.0), {}), 16, kNoStop);
  for (const FamilyCube& fc : w.family()) CHECK(fc.N_Q == 0);
  CHECK(w.value({3.3, 7.1}) == 0.0);
  CHECK(w.lipschitz() == 0.0);
  const WitnessValue v = witness_value(w, PointSet(Box::square(16.0), {}),
                                       PointSet(Box::square(16.0), {{1, 1}}));
  CHECK(v.raw == 0.0);
  CHECK(v.normalized == 0.0);
}

TEST_CASE("no stopping keeps every cube") {
  RngStream r(41, "all");
  const WitnessField w = build_witness(poisson(8, r), 8, kNoStop);
  CHECK(w.family().size() == 1 + 4 + 16 + 64);
  CHECK(w.exceptional_area() == 0.0);
  CHECK_FALSE(w.root_rejected());
  CHECK(w.family().front().cube == DyadicCube::root(8));
  std::ostringstream out;
  w.write_jsonl(out);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 85);
}

TEST_CASE("single point evaluated by hand") {
  // R = 2: the point sits in the right half of the root and in the left
  // half of the lower-right unit cube.
  const Point X{1.3, 0.5};
  const PointSet mu(Box::square(2.0), {X});
  const WitnessField w = build_witness(mu, 2, kNoStop);
  const Mask m = make_mask();
  const auto N = [&](const DyadicCube& Q) {
    for (const FamilyCube& fc : w.family()) {
      if (fc.cube == Q) return fc.N_Q;
    }
    return std::int64_t{99};
  };
  CHECK(N(DyadicCube::root(2)) == 1);
  CHECK(N(DyadicCube(2, 1, 1, 0)) == -1);
  CHECK(N(DyadicCube(2, 1, 0, 0)) == 0);
  const double expected = m.value({0.65, 0.25}) - m.value({0.3, 0.5});
  CHECK(w.value(X) == doctest::Approx(expected).epsilon(1e-14));
  const WitnessValue v = witness_value(w, mu, PointSet(Box::square(2.0), {}));
  CHECK(v.raw == doctest::Approx(expected));
  CHECK(v.normalized == doctest::Approx(expected / w.lipschitz()));
  CHECK_THROWS_AS(witness_value(w, mu, PointSet(Box::square(4.0), {})), std::invalid_argument);
  CHECK_THROWS_AS(build_witness(mu, 3, 16.0), std::invalid_argument);
  CHECK_THROWS_AS(build_witness(mu, 2, 16.0, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(build_witness(mu, 2, 0.0), std::invalid_argument);
}

TEST_CASE("identical measures give zero") {
  RngStream r(42, "same");
  const PointSet mu = poisson(32, r);
  const WitnessField w = build_witness(mu, 32);
  CHECK(witness_value(w, mu, mu).raw == 0.0);
}

TEST_CASE("mean of N_Q times the mask integral is the area") {
  RngStream r(43, "mean");
  const DyadicCube Q = DyadicCube::root(4);
  const CubeMask z = rescale_to_cube(make_mask(), Q);
  const int draws = 40000;
  double s = 0.0;
  double s2 = 0.0;
  for (int k = 0; k < draws; ++k) {
    const PointSet ps = poisson(4, r);
    std::int64_t n = 0;
    double sum = 0.0;
    for (const Point& p : ps) {
      n += p.x >= 2.0 ? 1 : -1;
      sum += z.value(p);
    }
    const double v = static_cast<double>(n) * sum;
    s += v;
    s2 += v * v;
  }
  const double mean = s / draws;
  const double se = std::sqrt((s2 / draws - mean * mean) / draws);
  CHECK(std::abs(mean - 16.0) < 3.0 * se);
}

TEST_CASE("admissibility of built fields") {
  RngStream r(44, "adm");
  for (std::int64_t R : {16, 32}) {
    for (int rep = 0; rep < 5; ++rep) {
      const PointSet mu = poisson(R, r);
      const WitnessField w = build_witness(mu, R);
      CHECK(w.boundary_max() < 1e-9);
      CHECK(std::abs(w.integral()) <= 1e-6 * R * R);
      // The certificate dominates the gradient everywhere, probed densely.
      double probe = 0.0;
      for (int k = 0; k < 20000; ++k) {
        const auto g = w.gradient({R * r.uniform(), R * r.uniform()});
        probe = std::max(probe, std::hypot(g[0], g[1]));
      }
      CHECK(probe <= w.lipschitz());
      CHECK(w.grid_gradient_max() <= w.lipschitz());
      CHECK(w.lipschitz() <= kWitnessLipschitzConstant * std::sqrt(16.0 * std::log(double(R))));
    }
  }
}

TEST_CASE("exceptional area shrinks as M grows") {
  RngStream r(45, "mono");
  double mean[3] = {0, 0, 0};
  const double Ms[3] = {4.0, 16.0, 64.0};
  for (int rep = 0; rep < 100; ++rep) {
    const PointSet mu = poisson(32, r);
    double prev = 2e9;
    for (int k = 0; k < 3; ++k) {
      const double e = build_witness(mu, 32, Ms[k]).exceptional_area();
      CHECK(e <= prev);
      prev = e;
      mean[k] += e / (32.0 * 32.0) / 100.0;
    }
  }
  CHECK(mean[0] > mean[1]);
  CHECK(mean[1] > mean[2]);
}

TEST_CASE("normalized value is stable in M") {
  double v16 = 0.0;
  double v64 = 0.0;
  for (const auto& rec : lower_bound_scan({64}, 10, 16.0, 0.25, 46)) v16 += rec.value.normalized;
  for (const auto& rec : lower_bound_scan({64}, 10, 64.0, 0.25, 46)) v64 += rec.value.normalized;
  CHECK(v16 > 0.0);
  CHECK(v64 > 0.0);
  CHECK(v16 / v64 < 2.0);
  CHECK(v64 / v16 < 2.0);
}

TEST_CASE("weak duality against the exact p=1 cost") {
  const auto recs = lower_bound_scan({16}, 10, 16.0, 0.25, 47);
  REQUIRE(recs.size() == 10);
  for (std::int64_t s = 0; s < 10; ++s) {
    const RngStream base = replicate_stream(47, 16, s);
    RngStream mu_rng = base.split("mu");
    RngStream nu_rng = base.split("nu");
    const PointSet mu = sample_poisson(Box::square(16.0), 1.0, mu_rng);
    const PointSet nu =
        sample_uniform_n(Box::square(16.0), static_cast<std::int64_t>(mu.size()), nu_rng);
    CHECK(recs[static_cast<std::size_t>(s)].count == mu.size());
    CHECK(recs[static_cast<std::size_t>(s)].value.normalized <=
          solve_assignment(mu, nu, 1).cost + 1e-9);
  }
}

TEST_CASE("increments across levels are uncorrelated") {
  // N_Q grad zeta_Q at a fixed point, for the root and the cube of side 4
  // containing it.
  RngStream r(48, "mart");
  const Mask m = make_mask();
  const Point x{5.3, 6.7};
  const DyadicCube big = DyadicCube::root(16);
  const DyadicCube small(16, 4, 1, 1);
  const CubeMask zb = rescale_to_cube(m, big);
  const CubeMask zs = rescale_to_cube(m, small);
  const auto gb = zb.gradient(x);
  const auto gs = zs.gradient(x);
  const int draws = 20000;
  double s = 0.0;
  double s2 = 0.0;
  for (int k = 0; k < draws; ++k) {
    const DyadicTree tree(poisson(16, r));
    const double nb = static_cast<double>(tree.signed_count(big));
    const double ns = static_cast<double>(tree.signed_count(small));
    const double v = nb * ns * (gb[0] * gs[0] + gb[1] * gs[1]);
    s += v;
    s2 += v * v;
  }
  const double mean = s / draws;
  const double se = std::sqrt((s2 / draws - mean * mean) / draws);
  CHECK(std::abs(mean) < 3.0 * se);
}

}
