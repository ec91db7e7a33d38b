#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

#include "dyadot/dyadic.hpp"
#include "dyadot/mask.hpp"
#include "dyadot/point_process.hpp"

namespace dyadot {

struct FamilyCube {
  DyadicCube cube;
  std::int64_t N_Q = 0;
  /// No child of this cube is in the family.
  bool leaf = false;
  /// Leaf of side > 1: subdivision stopped above the minimal scale.
  bool exceptional = false;
};

/// zeta = sum of N_Q zeta_Q over the stopped family of dyadic cubes, together
/// with node samples on an h-grid and a certified Lipschitz constant.
class WitnessField {
 public:
  std::int64_t R() const { return R_; }
  double M() const { return M_; }
  double h() const { return h_; }
  const Point& origin() const { return origin_; }

  /// Top-down order: by level, then (j, i).
  const std::vector<FamilyCube>& family() const { return family_; }
  /// The root failed a stopping test, so the family is empty and zeta = 0.
  bool root_rejected() const { return root_rejected_; }
  /// Area of the exceptional cubes (R^2 when the root is rejected).
  double exceptional_area() const { return exceptional_area_; }

  /// Exact evaluation by descending the family.
  double value(const Point& x) const;
  std::array<double, 2> gradient(const Point& x) const;

  /// Nodes per side, R/h + 1; node (a,b) sits at origin + (a h, b h).
  std::int64_t nodes_per_side() const { return nodes_; }
  const std::vector<double>& zeta_samples() const { return zeta_; }
  const std::vector<double>& grad_x_samples() const { return gx_; }
  const std::vector<double>& grad_y_samples() const { return gy_; }

  /// max |grad zeta| over the nodes.
  double grid_gradient_max() const { return grid_grad_max_; }
  /// max over leaves of sum_{family Q containing the leaf} |N_Q| H / side^2,
  /// with H = kMaskHessianBound; bounds the Hessian norm of zeta.
  double hessian_bound() const { return hessian_bound_; }
  /// The bound above restricted to the family cubes containing x.
  double chain_hessian(const Point& x) const;
  /// Certified bound on |grad zeta|: the maximum over h-cells of the largest
  /// corner gradient plus (h / sqrt 2) times the cell's chain_hessian.
  double lipschitz() const { return lipschitz_; }
  /// Trapezoidal quadrature of zeta over the node grid.
  double integral() const { return integral_; }
  /// Largest |zeta| on the boundary nodes of the root.
  double boundary_max() const { return boundary_max_; }

  /// JSONL: one family cube per line with level, side, i, j, N_Q, leaf and
  /// stopped flags.
  void write_jsonl(std::ostream& out) const;

 private:
  friend WitnessField build_witness(const PointSet&, std::int64_t, double, double);

  int find(const DyadicCube& Q) const;

  std::int64_t R_ = 0;
  double M_ = 0.0;
  double h_ = 0.0;
  Point origin_;
  Mask mask_;
  std::vector<FamilyCube> family_;
  // Per level (0 = root): family index of each cube, -1 when absent.
  std::vector<std::vector<int>> index_;
  bool root_rejected_ = false;
  double exceptional_area_ = 0.0;
  std::int64_t nodes_ = 0;
  std::vector<double> zeta_;
  std::vector<double> gx_;
  std::vector<double> gy_;
  double grid_grad_max_ = 0.0;
  double hessian_bound_ = 0.0;
  double lipschitz_ = 0.0;
  double integral_ = 0.0;
  double boundary_max_ = 0.0;
};

/// Builds the witness from mu alone. A cube of the family is subdivided
/// when each of its four children Q passes both tests
///   int_Q |grad sum_{family Qbar >= Q} N zeta|^2 <= M E |Q| ln R   (Q's term included)
///   N_Q^2 <= M |Q| ln R,
/// with E = kMaskDirichletEnergy, the energy of a single rescaled mask per
/// unit area, and the integral by midpoint quadrature on h-cells. The root joins
/// the family only if it passes the same tests. ps.box() must be the square
/// of side R (a power of two >= 2); h must divide 1/2 and be <= 1/4.
WitnessField build_witness(const PointSet& mu, std::int64_t R, double M = 16.0,
                           double h = 0.25);

/// K in lipschitz() <= K sqrt(M ln R). Measured maxima over Poisson sweeps
/// (R = 16..128, M = 0.5..16) stay below 83; frozen with margin.
inline constexpr double kWitnessLipschitzConstant = 120.0;

struct WitnessValue {
  /// sum over mu of zeta minus sum over nu of zeta.
  double raw = 0.0;
  double lipschitz = 0.0;
  /// raw / lipschitz: the value of a 1-Lipschitz test function, hence a
  /// lower bound for the p=1 matching cost when |mu| = |nu|.
  double normalized = 0.0;
};

WitnessValue witness_value(const WitnessField& w, const PointSet& mu, const PointSet& nu);

struct LowerBoundRecord {
  std::int64_t R = 0;
  std::int64_t seed = 0;
  std::size_t count = 0;
  WitnessValue value;
  double exceptional_area = 0.0;
};

/// mu ~ unit Poisson on (0,R)^2 and nu = |mu| uniform points, drawn from the
/// "mu"/"nu" children of replicate_stream(master_seed, R, seed).
std::vector<LowerBoundRecord> lower_bound_scan(const std::vector<std::int64_t>& Rs,
                                               std::int64_t seeds, double M, double h,
                                               std::uint64_t master_seed);

}  // namespace dyadot
