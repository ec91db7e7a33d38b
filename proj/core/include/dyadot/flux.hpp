#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dyadot/dyadic.hpp"
#include "dyadot/neumann.hpp"
#include "dyadot/point_process.hpp"
#include "dyadot/rng.hpp"

namespace dyadot {

/// Vector field on (0,R)^2 given by its normal components on the faces of
/// an h-grid (m = R/h cells per side), linear across each cell in the normal
/// direction. Face layout matches NeumannSolution.
class FluxField {
 public:
  FluxField() = default;
  FluxField(double R, double h);

  /// Samples an analytic field at face midpoints.
  static FluxField sample(double R, double h,
                          const std::function<std::array<double, 2>(double, double)>& j);

  double R() const { return R_; }
  double h() const { return h_; }
  std::int64_t cells() const { return m_; }
  std::vector<double>& jx() { return jx_; }
  std::vector<double>& jy() { return jy_; }
  const std::vector<double>& jx() const { return jx_; }
  const std::vector<double>& jy() const { return jy_; }

  /// Cubes whose gradients were summed, in summation order.
  const std::vector<DyadicCube>& contributors() const { return contributors_; }
  std::vector<DyadicCube>& contributors() { return contributors_; }

  /// Cellwise divergence, row-major m x m.
  std::vector<double> divergence() const;
  /// Largest |normal component| on the outer boundary faces.
  double boundary_normal_max() const;
  /// Node values (m+1)^2 x 2 interleaved (jx, jy): each component is the
  /// average of the faces meeting at the node that carry it.
  std::vector<double> node_samples() const;
  /// Writes <stem>.bin / <stem>.json with the node samples.
  void write(const std::filesystem::path& stem) const;

 private:
  double R_ = 0.0;
  double h_ = 0.0;
  std::int64_t m_ = 0;
  std::vector<double> jx_;
  std::vector<double> jy_;
  std::vector<DyadicCube> contributors_;
};

/// j = -sum grad phi_Q over the dyadic Q that strictly contain a partition
/// cube, summed in cube order. The partition must not overflow; h must
/// divide 1/2.
FluxField assemble_flux(const PointSet& ps, const StoppedPartition& partition, double h);

/// int |j|^2: trapezoidal rule in the normal direction of each cell, exact
/// in the tangential one.
double flux_energy(const FluxField& f);

/// Relative L2 mismatch between div j and n - lambda, where n is the
/// density of the root and lambda the partition density.
double divergence_mismatch(const FluxField& f, const PointSet& ps,
                           const StoppedPartition& partition);

struct UpperBoundReport {
  std::int64_t R = 0;
  std::size_t count = 0;
  /// Density of the root, count / R^2.
  double density = 0.0;
  /// sum over partition cubes of 2 side^2 * count.
  double coarse = 0.0;
  /// int |j|^2 and 2 int |j|^2.
  double flux_energy = 0.0;
  double flux = 0.0;
  /// Smallest of lambda and n; the flux term needs both >= 1/2.
  double min_density = 0.0;
  bool brutal = false;
  std::string brutal_reason;
  double total = 0.0;
  std::size_t partition_cubes = 0;
  std::size_t flux_cubes = 0;

  std::string to_json() const;
};

/// Certified bound on W_2^2 between the points and their mean density on
/// (0,R)^2: (sqrt coarse + sqrt flux)^2, or count * 2R^2 when the root
/// overflows or a density drops below 1/2.
UpperBoundReport upper_bound(const PointSet& ps, double h = 0.25);

/// Monte Carlo estimate of E int_Q |grad phi_Q|^2 for a cube of the given
/// side under a Poisson process of the given intensity.
MomentEstimate cell_energy_moment(std::int64_t side, std::int64_t replicates, RngStream& rng,
                                  double intensity = 1.0, double h = 0.25);

}  // namespace dyadot
