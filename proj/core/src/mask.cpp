#include "dyadot/mask.hpp"

namespace dyadot {

namespace {

constexpr double kHalfWidth = 0.4;

struct Profile {
  double f = 0.0;
  double df = 0.0;
  double ddf = 0.0;
};

// psi and its derivatives in t, for u = (t - 1/2)/0.4.
Profile bump(double t) {
  const double u = (t - 0.5) / kHalfWidth;
  if (u <= -1.0 || u >= 1.0) return {};
  const double w = 1.0 - u * u;
  return {w * w * w, -6.0 * u * w * w / kHalfWidth,
          w * (30.0 * u * u - 6.0) / (kHalfWidth * kHalfWidth)};
}

Profile odd(double t) {
  const double u = (t - 0.5) / kHalfWidth;
  if (u <= -1.0 || u >= 1.0) return {};
  const double w = 1.0 - u * u;
  return {u * w * w * w, w * w * (1.0 - 7.0 * u * u) / kHalfWidth,
          w * (42.0 * u * u * u - 18.0 * u) / (kHalfWidth * kHalfWidth)};
}

}  // namespace

double Mask::value(const Point& x) const { return c * odd(x.x).f * bump(x.y).f; }

std::array<double, 2> Mask::gradient(const Point& x) const {
  const Profile s = odd(x.x);
  const Profile b = bump(x.y);
  return {c * s.df * b.f, c * s.f * b.df};
}

std::array<double, 3> Mask::hessian(const Point& x) const {
  const Profile s = odd(x.x);
  const Profile b = bump(x.y);
  return {c * s.ddf * b.f, c * s.df * b.df, c * s.f * b.ddf};
}

std::vector<double> Mask::samples(int n) const {
  std::vector<double> out(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  const double h = 1.0 / n;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) +
          static_cast<std::size_t>(i)] = value({(i + 0.5) * h, (j + 0.5) * h});
    }
  }
  return out;
}

Mask make_mask() { return Mask{}; }

CubeMask::CubeMask(const Mask& mask, const DyadicCube& Q, const Point& origin)
    : mask_(mask),
      corner_{origin.x + static_cast<double>(Q.i * Q.side),
              origin.y + static_cast<double>(Q.j * Q.side)},
      side_(static_cast<double>(Q.side)) {}

double CubeMask::value(const Point& x) const {
  return mask_.value({(x.x - corner_.x) / side_, (x.y - corner_.y) / side_});
}

std::array<double, 2> CubeMask::gradient(const Point& x) const {
  const auto g = mask_.gradient({(x.x - corner_.x) / side_, (x.y - corner_.y) / side_});
  return {g[0] / side_, g[1] / side_};
}

CubeMask rescale_to_cube(const Mask& mask, const DyadicCube& Q, const Point& origin) {
  return CubeMask(mask, Q, origin);
}

}  // namespace dyadot
