#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <vector>

#include "dyadot/geometry.hpp"
#include "dyadot/point_process.hpp"
#include "dyadot/rng.hpp"

namespace dyadot {

/// Dyadic square of side `side` with index (i,j) inside a root square of
/// side R. Sides are powers of two between 1 and R.
struct DyadicCube {
  std::int64_t R = 1;
  std::int64_t side = 1;
  std::int64_t i = 0;
  std::int64_t j = 0;

  DyadicCube() = default;
  DyadicCube(std::int64_t root, std::int64_t side_, std::int64_t i_, std::int64_t j_);

  static DyadicCube root(std::int64_t R) { return DyadicCube(R, R, 0, 0); }

  /// Box relative to a root whose lower-left corner is `origin`.
  Box box(const Point& origin = {}) const;
  double area() const { return static_cast<double>(side * side); }
  /// Depth below the root (root = 0).
  int level() const;
  /// Children in the order (lower-left, lower-right, upper-left, upper-right).
  std::vector<DyadicCube> children() const;
  bool has_children() const { return side > 1; }

  friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
  friend auto operator<=>(const DyadicCube&, const DyadicCube&) = default;
};

bool is_power_of_two(std::int64_t v);

struct CubeStats {
  std::int64_t mu_count = 0;
  /// mu_count / side^2.
  double n_Q = 0.0;
  /// Count in the right half minus count in the left half.
  std::int64_t N_Q = 0;

  friend bool operator==(const CubeStats&, const CubeStats&) = default;
};

/// Direct count over the points of `ps`; the cube is placed at the lower
/// left corner of ps.box(). Throws std::invalid_argument if it does not fit.
CubeStats cube_stats(const PointSet& ps, const DyadicCube& Q);

/// Densities in [1/2, 2], endpoints included, count as "in range".
inline bool density_in_range(double n) { return n >= 0.5 && n <= 2.0; }

/// Counts of every dyadic cube of side >= 1 of a square root box, built in
/// one pass: points are binned at side 1 (split into left and right halves
/// for N_Q) and counts are aggregated upward.
class DyadicTree {
 public:
  /// ps.box() must be a square whose side is a power of two >= 1.
  explicit DyadicTree(const PointSet& ps);

  std::int64_t R() const { return R_; }
  const Point& origin() const { return origin_; }
  /// Number of levels; level 0 is the root, level depth()-1 has side 1.
  int depth() const { return static_cast<int>(count_.size()); }

  CubeStats stats(const DyadicCube& Q) const;
  std::int64_t count(const DyadicCube& Q) const;
  std::int64_t signed_count(const DyadicCube& Q) const;
  double density(const DyadicCube& Q) const;

  /// The dyadic cube of the given side containing x (closed-open).
  DyadicCube cube_at(const Point& x, std::int64_t side) const;

  /// JSONL, one cube per line, root first then level by level in (j,i)
  /// order: {"level","side","i","j","count","n_Q","N_Q"}.
  void write_jsonl(std::ostream& out) const;

 private:
  std::size_t slot(const DyadicCube& Q) const;

  std::int64_t R_ = 1;
  Point origin_;
  // Indexed by level (0 = root); cube (i,j) of a level with k cubes per row
  // sits at j*k + i.
  std::vector<std::vector<std::int64_t>> count_;
  std::vector<std::vector<std::int64_t>> signed_;
};

struct StoppingScale {
  /// 2 * largest side of a cube containing x with density outside [1/2,2],
  /// at least 1. Equals 2R when the root itself is out of range.
  double r_star = 1.0;
  /// Sentinel: the root cube is out of range, so the scale exceeds R.
  bool exceeds_root = false;
};

StoppingScale stopping_scale(const DyadicTree& tree, const Point& x);
StoppingScale stopping_scale(const PointSet& ps, const Point& x);

struct StoppedPartition {
  std::int64_t R = 1;
  Point origin;
  /// The stopped cubes Q*, sorted. Empty when overflow is set.
  std::vector<DyadicCube> cubes;
  /// Root density outside [1/2, 2].
  bool overflow = false;

  /// Side of the partition cube containing x (0 when overflow).
  std::int64_t side_at(const Point& x) const;
};

/// Greedy top-down subdivision: a cube in range is kept when it has side 1
/// or one of its children is out of range; otherwise its children are
/// examined.
StoppedPartition build_partition(const DyadicTree& tree);
StoppedPartition build_partition(const PointSet& ps);

struct MomentEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t replicates = 0;
  /// Replicates in which the root was out of range (r* counted as 2R).
  std::int64_t overflows = 0;
};

/// Monte Carlo estimate of E r*(x)^4 at the centre of (0,R)^2 under a
/// Poisson process of the given intensity.
MomentEstimate r_star_fourth_moment(double intensity, std::int64_t R,
                                    std::int64_t replicates, RngStream& rng);

}  // namespace dyadot
