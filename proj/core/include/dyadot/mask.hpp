#pragma once

#include <array>
#include <vector>

#include "dyadot/dyadic.hpp"
#include "dyadot/geometry.hpp"

namespace dyadot {

/// Product mask zeta(x1,x2) = c * s(x1) * b(x2) on the unit square, with
///   b(t) = psi((t - 1/2) / 0.4),   psi(u)   = (1 - u^2)^3,
///   s(t) = sigma((t - 1/2) / 0.4), sigma(u) = u (1 - u^2)^3,
/// both vanishing for |u| >= 1. Support is [0.1, 0.9]^2, s is odd about 1/2
/// so the mask integrates to zero, and c = 35/1.28 makes the right-half
/// integral minus the left-half integral equal to one.
struct Mask {
  double c = 35.0 / 1.28;

  double value(const Point& x) const;
  /// Gradient with respect to the unit-square coordinates.
  std::array<double, 2> gradient(const Point& x) const;
  /// Hessian entries (xx, xy, yy).
  std::array<double, 3> hessian(const Point& x) const;

  /// Row-major samples of the value at cell centres of an n x n grid.
  std::vector<double> samples(int n) const;
};

/// sup |grad mask|, attained at the centre (c / 0.4). A 1024^2 cell-centre
/// grid reaches 68.3582.
inline constexpr double kMaskGradientSup = 68.359375;
/// Upper bound on the Frobenius norm of the mask Hessian, from the 1D maxima
/// of psi, psi', psi'', sigma, sigma', sigma'' (true maximum ~717.3).
inline constexpr double kMaskHessianBound = 830.0;

/// Dirichlet energy of the mask, int |grad mask|^2 = 74240000/184041. It is
/// scale invariant in two dimensions, so E int |grad N_Q zeta_Q|^2 equals
/// this constant times |Q| for a Poisson process.
inline constexpr double kMaskDirichletEnergy = 74240000.0 / 184041.0;

Mask make_mask();

/// zeta_Q(x) = mask((x - corner) / side) for a cube of the root at `origin`.
class CubeMask {
 public:
  CubeMask(const Mask& mask, const DyadicCube& Q, const Point& origin = {});

  double value(const Point& x) const;
  std::array<double, 2> gradient(const Point& x) const;
  double side() const { return side_; }

 private:
  Mask mask_;
  Point corner_;
  double side_;
};

CubeMask rescale_to_cube(const Mask& mask, const DyadicCube& Q, const Point& origin = {});

}  // namespace dyadot
