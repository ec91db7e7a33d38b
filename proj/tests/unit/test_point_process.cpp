#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "dyadot/errors.hpp"
#include "dyadot/point_process.hpp"
#include "dyadot/rng.hpp"

using namespace dyadot;

TEST_SUITE("point_process") {

TEST_CASE("streams are reproducible and label dependent") {
  RngStream a(42, "mu");
  RngStream b(42, "mu");
  RngStream c(42, "nu");
  int same_c = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto x = a();
    CHECK(x == b());
    same_c += (x == c()) ? 1 : 0;
  }
  CHECK(same_c == 0);
  const RngStream s1 = replicate_stream(7, 32, 3).split("mu");
  const RngStream s2 = replicate_stream(7, 32, 3).split("mu");
  CHECK(s1.label() == s2.label());
}

TEST_CASE("uniform doubles lie in [0,1) with the right mean") {
  RngStream r(1, "u");
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 1e5 == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("zero intensity gives the empty set") {
  RngStream r(3, "zero");
  CHECK(sample_poisson(Box::square(10.0), 0.0, r).empty());
  CHECK_THROWS_AS(sample_poisson(Box::square(1.0), -1.0, r), std::invalid_argument);
  CHECK_THROWS_AS(sample_poisson(Box::square(1.0), INFINITY, r), std::invalid_argument);
  CHECK_THROWS_AS(Box(0, 0, 0, 1), std::invalid_argument);
}

TEST_CASE("empty-box frequency at unit intensity is 1/e") {
  RngStream r(11, "p0");
  const Box unit = Box::square(1.0);
  const int draws = 1000000;
  int empty = 0;
  for (int k = 0; k < draws; ++k) empty += sample_poisson(unit, 1.0, r).empty() ? 1 : 0;
  CHECK(std::abs(empty / double(draws) - std::exp(-1.0)) < 0.002);
}

TEST_CASE("count law at intensity 4: mean, variance and chi-square") {
  RngStream r(12, "p4");
  const Box unit = Box::square(1.0);
  const int draws = 100000;
  std::vector<int> hist(13, 0);  // last bin: >= 12
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int k = 0; k < draws; ++k) {
    const double n = static_cast<double>(sample_poisson(unit, 4.0, r).size());
    sum += n;
    sum_sq += n * n;
    ++hist[std::min<std::size_t>(static_cast<std::size_t>(n), 12)];
  }
  const double mean = sum / draws;
  const double var = sum_sq / draws - mean * mean;
  CHECK(std::abs(mean - 4.0) < 0.02);
  // Var of the sample variance of a Poisson(4) is about (mu4 - var^2)/n,
  // mu4 = 3*16 + 4 = 52.
  CHECK(std::abs(var - 4.0) < 3.0 * std::sqrt((52.0 - 16.0) / draws));

  // Pearson chi-square against Poisson(4) with 13 bins, 12 degrees of
  // freedom; the 0.1% critical value is 32.91.
  double chi2 = 0.0;
  double pk = std::exp(-4.0);
  double tail = 1.0;
  for (int k = 0; k < 13; ++k) {
    const double p = k < 12 ? pk : tail;
    const double e = p * draws;
    chi2 += (hist[static_cast<std::size_t>(k)] - e) * (hist[static_cast<std::size_t>(k)] - e) / e;
    tail -= pk;
    pk *= 4.0 / (k + 1);
  }
  CHECK(chi2 < 32.91);
}

TEST_CASE("counts in disjoint boxes are uncorrelated") {
  RngStream r(13, "cov");
  const Box box(0, 0, 2, 1);
  const Box left(0, 0, 1, 1);
  const int draws = 100000;
  double sa = 0, sb = 0, sab = 0, sab2 = 0;
  for (int k = 0; k < draws; ++k) {
    const PointSet ps = sample_poisson(box, 1.0, r);
    double a = 0;
    for (const Point& p : ps) a += left.contains(p) ? 1 : 0;
    const double b = static_cast<double>(ps.size()) - a;
    sa += a;
    sb += b;
    sab += a * b;
    sab2 += a * a * b * b;
  }
  const double cov = sab / draws - (sa / draws) * (sb / draws);
  const double se = std::sqrt((sab2 / draws - (sab / draws) * (sab / draws)) / draws);
  CHECK(std::abs(cov) < 3.0 * se);
}

TEST_CASE("fixed-count sampler") {
  RngStream r(14, "n");
  CHECK(sample_uniform_n(Box::square(1.0), 0, r).empty());
  double sx = 0.0;
  double sy = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const PointSet ps = sample_uniform_n(Box::square(1.0), 1, r);
    sx += ps[0].x;
    sy += ps[0].y;
  }
  CHECK(std::abs(sx / 1e5 - 0.5) < 0.005);
  CHECK(std::abs(sy / 1e5 - 0.5) < 0.005);

  // Kolmogorov-Smirnov on the x marginal; 1% critical value 1.6276/sqrt(n).
  const PointSet ps = sample_uniform_n(Box::square(1.0), 1000, r);
  std::vector<double> xs;
  for (const Point& p : ps) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max({d, (i + 1) / 1000.0 - xs[i], xs[i] - i / 1000.0});
  }
  CHECK(d < 1.6276 / std::sqrt(1000.0));
}

TEST_CASE("points are canonical and inside the box") {
  RngStream r(15, "canon");
  const Box box(-3, 2, 5, 4);
  const PointSet ps = sample_poisson(box, 3.0, r);
  CHECK(std::is_sorted(ps.begin(), ps.end()));
  for (const Point& p : ps) CHECK(box.contains(p));
  RngStream again(15, "canon");
  CHECK(sample_poisson(box, 3.0, again) == ps);
  CHECK_THROWS_AS(PointSet(Box::square(1.0), {{1.0, 0.5}}), std::invalid_argument);
}

TEST_CASE("restriction uses the closed-open convention") {
  const PointSet ps(Box::square(2.0), {{0.5, 0.5}, {1.0, 0.2}, {0.999, 1.0}});
  CHECK(restrict_to(ps, Box(-1, -1, 3, 3)).points() == ps.points());
  CHECK(restrict_to(ps, Box(5, 5, 6, 6)).empty());
  // Left half [0,1) x [0,2): x = 1.0 belongs to the right half.
  const PointSet left = restrict_to(ps, Box(0, 0, 1, 2));
  REQUIRE(left.size() == 2);
  CHECK(left[0] == Point{0.5, 0.5});
  CHECK(left[1] == Point{0.999, 1.0});
  const PointSet right = restrict_to(ps, Box(1, 0, 2, 2));
  REQUIRE(right.size() == 1);
  CHECK(right[0] == Point{1.0, 0.2});
  // Lower half [0,2) x [0,1): y = 1.0 is excluded.
  CHECK(restrict_to(ps, Box(0, 0, 2, 1)).size() == 2);
  CHECK(left.metadata().restrictions.size() == 1);
}

TEST_CASE("csv and sidecar round trip") {
  RngStream r(16, "io");
  const PointSet ps = sample_poisson(Box::square(4.0), 2.0, r);
  const auto dir = std::filesystem::temp_directory_path() / "dyadot_pp_test";
  std::filesystem::create_directories(dir);
  write_points_csv(ps, dir / "p.csv");
  write_metadata_json(ps, dir / "p.json");
  const PointSet back = read_point_set(dir / "p.csv", dir / "p.json");
  CHECK(back.points() == ps.points());
  CHECK(back.box() == ps.box());
  CHECK(back.metadata().seed == ps.metadata().seed);
  CHECK_THROWS_AS(read_points_csv(dir / "missing.csv", Box::square(1.0)), IoError);
  std::filesystem::remove_all(dir);
}

}
