#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "dyadot/flux.hpp"
#include "dyadot/grid_io.hpp"
#include "dyadot/neumann.hpp"
#include "dyadot/semidiscrete.hpp"

using namespace dyadot;

namespace {

PointSet lattice(std::int64_t R) {
  std::vector<Point> pts;
  for (std::int64_t j = 0; j < R; ++j) {
    for (std::int64_t i = 0; i < R; ++i) pts.push_back({i + 0.5, j + 0.5});
  }
  return PointSet(Box::square(static_cast<double>(R)), pts);
}

double max_abs(const std::vector<double>& v) {
  double a = 0.0;
  for (double x : v) a = std::max(a, std::abs(x));
  return a;
}

}  // namespace

TEST_SUITE("flux_upper") {

TEST_CASE("equal child densities give a zero gradient") {
  CellProblem cp;
  cp.cube = DyadicCube(8, 4, 0, 0);
  cp.child_density = {1.25, 1.25, 1.25, 1.25};
  cp.parent_density = 1.25;
  const NeumannSolution s = solve_cell(cp);
  CHECK(s.m == 16);
  CHECK(max_abs(s.gx) == 0.0);
  CHECK(max_abs(s.gy) == 0.0);
  CHECK(s.energy() == 0.0);
}

TEST_CASE("two-phase problem matches the 1D solution") {
  // Densities 2 on the left, 0 on the right, parent 1: -phi'' = -1 then +1,
  // so phi' = x on the left half and L - x on the right.
  const double L = 4.0;
  for (double h : {0.25, 0.0625}) {
    CellProblem cp;
    cp.cube = DyadicCube(4, 4, 0, 0);
    cp.child_density = {2.0, 0.0, 2.0, 0.0};
    cp.parent_density = 1.0;
    cp.h = h;
    const NeumannSolution s = solve_cell(cp);
    const std::int64_t m = s.m;
    CHECK(s.residual <= 1e-10);
    for (std::int64_t j = 0; j < m; ++j) {
      for (std::int64_t i = 0; i <= m; ++i) {
        const double x = static_cast<double>(i) * h;
        const double exact = x <= L / 2 ? x : L - x;
        REQUIRE(std::abs(s.gx[static_cast<std::size_t>(j * (m + 1) + i)] - exact) < 1e-10);
      }
    }
    CHECK(max_abs(s.gy) < 1e-10);
    // phi = x^2/2 on the left, mirrored on the right, up to a constant.
    std::vector<double> exact(static_cast<std::size_t>(m));
    double mean = 0.0;
    for (std::int64_t i = 0; i < m; ++i) {
      const double x = (static_cast<double>(i) + 0.5) * h;
      const double v = x <= L / 2 ? x * x / 2 : L * L / 4 - (L - x) * (L - x) / 2;
      exact[static_cast<std::size_t>(i)] = v;
      mean += v / static_cast<double>(m);
    }
    for (std::int64_t j = 0; j < m; ++j) {
      for (std::int64_t i = 0; i < m; ++i) {
        REQUIRE(std::abs(s.phi[static_cast<std::size_t>(j * m + i)] -
                         (exact[static_cast<std::size_t>(i)] - mean)) <= h * h);
      }
    }
    const auto c = s.centred_gradient(0, 0);
    CHECK(c[0] == doctest::Approx(h / 2));
    CHECK(c[1] == doctest::Approx(0.0));
    CHECK_THROWS_AS(s.centred_gradient(m, 0), std::out_of_range);
  }
}

TEST_CASE("random right-hand side") {
  RngStream r(51, "rhs");
  const std::int64_t m = 32;
  const double h = 0.25;
  std::vector<double> f(static_cast<std::size_t>(m * m));
  double mean = 0.0;
  for (double& v : f) mean += (v = r.uniform() - 0.3);
  mean /= static_cast<double>(f.size());
  CHECK_THROWS_AS(solve_neumann(m, h, f), std::invalid_argument);
  for (double& v : f) v -= mean;
  const NeumannSolution s = solve_neumann(m, h, f);
  CHECK(s.residual <= 1e-10);
  // Boundary faces carry no flux, so the divergence sums to zero.
  double total = 0.0;
  double worst = 0.0;
  for (std::int64_t j = 0; j < m; ++j) {
    for (std::int64_t i = 0; i < m; ++i) {
      const double div = (s.gx[static_cast<std::size_t>(j * (m + 1) + i + 1)] -
                          s.gx[static_cast<std::size_t>(j * (m + 1) + i)] +
                          s.gy[static_cast<std::size_t>((j + 1) * m + i)] -
                          s.gy[static_cast<std::size_t>(j * m + i)]) /
                         h;
      total += div * h * h;
      worst = std::max(worst, std::abs(div + f[static_cast<std::size_t>(j * m + i)]));
    }
  }
  CHECK(std::abs(total) < 1e-10);
  CHECK(worst < 1e-9);
  for (std::int64_t j = 0; j < m; ++j) {
    CHECK(s.gx[static_cast<std::size_t>(j * (m + 1))] == 0.0);
    CHECK(s.gx[static_cast<std::size_t>(j * (m + 1) + m)] == 0.0);
  }
  double phi_mean = 0.0;
  for (double v : s.phi) phi_mean += v;
  CHECK(std::abs(phi_mean) < 1e-9);
  CHECK_THROWS_AS(solve_neumann(m, h, std::vector<double>(10, 0.0)), std::invalid_argument);
}

TEST_CASE("uniform lattice has no flux") {
  const PointSet ps = lattice(16);
  const StoppedPartition part = build_partition(ps);
  const FluxField f = assemble_flux(ps, part, 0.25);
  CHECK(max_abs(f.jx()) == 0.0);
  CHECK(max_abs(f.jy()) == 0.0);
  CHECK(flux_energy(f) == 0.0);
  CHECK(f.contributors().size() == 1 + 4 + 16 + 64);

  const UpperBoundReport rep = upper_bound(ps);
  CHECK_FALSE(rep.brutal);
  CHECK(rep.coarse == doctest::Approx(2.0 * 256));
  CHECK(rep.flux == 0.0);
  CHECK(rep.total <= 2.0 * 16 * 16);
  const SemidiscreteResult exact = semidiscrete_w2(ps, ps.box(), 1.0, 0.25);
  CHECK(exact.value == doctest::Approx(256 * (1.0 / 6 - 0.0625 / 6)));
  CHECK(exact.value <= rep.total);
}

TEST_CASE("one level is the root cell solve") {
  // Unit cells hold 1, 2, 1, 1 points: every cube is in range.
  const PointSet ps(Box::square(2.0),
                    {{0.5, 0.5}, {1.2, 0.3}, {1.7, 0.8}, {0.4, 1.6}, {1.5, 1.5}});
  const StoppedPartition part = build_partition(ps);
  REQUIRE(part.cubes.size() == 4);
  const double h = 0.125;
  const FluxField f = assemble_flux(ps, part, h);
  REQUIRE(f.contributors().size() == 1);
  const NeumannSolution s = solve_cell(CellProblem::from_tree(DyadicTree(ps), DyadicCube::root(2), h));
  REQUIRE(f.jx().size() == s.gx.size());
  for (std::size_t k = 0; k < s.gx.size(); ++k) CHECK(f.jx()[k] == -s.gx[k]);
  for (std::size_t k = 0; k < s.gy.size(); ++k) CHECK(f.jy()[k] == -s.gy[k]);
  CHECK(flux_energy(f) == doctest::Approx(s.energy()));
}

TEST_CASE("divergence and boundary on Poisson samples") {
  RngStream r(52, "div");
  int checked = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const PointSet ps = sample_poisson(Box::square(16.0), 1.0, r);
    const StoppedPartition part = build_partition(ps);
    if (part.overflow) continue;
    for (double h : {0.25, 0.125}) {
      const FluxField f = assemble_flux(ps, part, h);
      CHECK(divergence_mismatch(f, ps, part) <= 5 * h);
      CHECK(f.boundary_normal_max() <= 1e-8);
    }
    ++checked;
  }
  CHECK(checked > 5);
  CHECK_THROWS_AS(assemble_flux(PointSet(Box::square(4.0), {}),
                                build_partition(PointSet(Box::square(4.0), {})), 0.25),
                  std::invalid_argument);
}

TEST_CASE("energy quadrature") {
  const FluxField zero(1.0, 0.125);
  CHECK(flux_energy(zero) == 0.0);
  const FluxField lin = FluxField::sample(1.0, 1.0 / 128, [](double x, double) {
    return std::array<double, 2>{x, 0.0};
  });
  CHECK(std::abs(flux_energy(lin) - 1.0 / 3.0) < 1e-3);
  for (double d : lin.divergence()) REQUIRE(d == doctest::Approx(1.0));

  const auto smooth = [](double x, double y) {
    return std::array<double, 2>{std::sin(3 * x) * std::cos(y), x * y * y};
  };
  const double coarse = flux_energy(FluxField::sample(2.0, 1.0 / 16, smooth));
  const double fine = flux_energy(FluxField::sample(2.0, 1.0 / 32, smooth));
  CHECK(std::abs(coarse - fine) / fine < 0.01);
  CHECK_THROWS_AS(FluxField(1.0, 0.3), std::invalid_argument);
}

TEST_CASE("flux grid export") {
  const FluxField f = FluxField::sample(2.0, 0.5, [](double x, double y) {
    return std::array<double, 2>{x, y};
  });
  const auto stem = std::filesystem::temp_directory_path() / "dyadot_flux_grid";
  f.write(stem);
  const GridFile g = read_grid(stem);
  CHECK(g.header.field == "flux");
  CHECK(g.header.nx == 5);
  CHECK(g.header.components == 2);
  REQUIRE(g.data.size() == 50);
  // Node (2, 1) averages the faces above and below it.
  CHECK(g.data[2 * (1 * 5 + 2)] == doctest::Approx(1.0));
  CHECK(g.data[2 * (1 * 5 + 2) + 1] == doctest::Approx(0.5));
  std::filesystem::remove(stem.string() + ".bin");
  std::filesystem::remove(stem.string() + ".json");
}

TEST_CASE("brutal fallback") {
  const UpperBoundReport empty = upper_bound(PointSet(Box::square(8.0), {}));
  CHECK(empty.brutal);
  CHECK(empty.total == 0.0);
  std::vector<Point> crowd(300, Point{1.0, 1.0});
  const UpperBoundReport dense = upper_bound(PointSet(Box::square(8.0), crowd));
  CHECK(dense.brutal);
  CHECK(dense.total == 300.0 * 2 * 64);
}

TEST_CASE("certified bound dominates the exact cost") {
  for (std::int64_t s = 0; s < 20; ++s) {
    RngStream r = replicate_stream(53, 8, s).split("mu");
    const PointSet ps = sample_poisson(Box::square(8.0), 1.0, r);
    if (ps.empty()) continue;
    const UpperBoundReport rep = upper_bound(ps);
    const double n = static_cast<double>(ps.size()) / 64.0;
    const double exact = semidiscrete_w2(ps, ps.box(), n, 0.25).value;
    CHECK(exact <= rep.total);
    if (!rep.brutal) {
      const double root = std::sqrt(rep.coarse) + std::sqrt(rep.flux);
      CHECK(rep.total == doctest::Approx(root * root));
    }
  }
}

TEST_CASE("cell energy scales with the area") {
  RngStream r(54, "cell");
  double lo = 1e300;
  double hi = 0.0;
  for (std::int64_t side : {4, 8, 16}) {
    const MomentEstimate e = cell_energy_moment(side, 200, r);
    const double per_area = e.mean / static_cast<double>(side * side);
    lo = std::min(lo, per_area);
    hi = std::max(hi, per_area);
  }
  CHECK(hi / lo < 3.0);
  RngStream a(55, "cell-i");
  RngStream b(55, "cell-i");
  const double one = cell_energy_moment(8, 300, a, 1.0).mean;
  const double two = cell_energy_moment(8, 300, b, 2.0).mean;
  CHECK(two > one);
  CHECK_THROWS_AS(cell_energy_moment(3, 10, a), std::invalid_argument);
  CHECK_THROWS_AS(cell_energy_moment(4, 0, a), std::invalid_argument);
}

TEST_CASE("cell gradients have zero mean") {
  RngStream r(56, "zero-mean");
  const std::int64_t side = 8;
  const double h = 0.25;
  const std::int64_t probes[3][2] = {{3, 5}, {16, 16}, {28, 9}};
  const int draws = 2000;
  double s[3][2] = {};
  double s2[3][2] = {};
  for (int k = 0; k < draws; ++k) {
    const DyadicTree tree(sample_poisson(Box::square(8.0), 1.0, r));
    const NeumannSolution sol = solve_cell(CellProblem::from_tree(tree, DyadicCube::root(side), h));
    for (int p = 0; p < 3; ++p) {
      const auto g = sol.centred_gradient(probes[p][0], probes[p][1]);
      for (int c = 0; c < 2; ++c) {
        s[p][c] += g[static_cast<std::size_t>(c)];
        s2[p][c] += g[static_cast<std::size_t>(c)] * g[static_cast<std::size_t>(c)];
      }
    }
  }
  for (int p = 0; p < 3; ++p) {
    for (int c = 0; c < 2; ++c) {
      const double mean = s[p][c] / draws;
      const double se = std::sqrt((s2[p][c] / draws - mean * mean) / draws);
      CHECK(std::abs(mean) < 3.0 * se);
    }
  }
}

TEST_CASE("flux energy grows like R^2 ln R") {
  double lo = 1e300;
  double hi = 0.0;
  for (std::int64_t R : {16, 32, 64}) {
    double sum = 0.0;
    int used = 0;
    for (std::int64_t s = 0; s < 20; ++s) {
      RngStream r = replicate_stream(57, R, s).split("mu");
      const PointSet ps = sample_poisson(Box::square(static_cast<double>(R)), 1.0, r);
      const StoppedPartition part = build_partition(ps);
      if (part.overflow) continue;
      sum += flux_energy(assemble_flux(ps, part, 0.25));
      ++used;
    }
    REQUIRE(used > 0);
    const double ratio = sum / used / (double(R) * R * std::log(double(R)));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(hi / lo < 3.0);
}

}
