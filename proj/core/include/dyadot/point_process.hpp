#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dyadot/geometry.hpp"
#include "dyadot/rng.hpp"

namespace dyadot {

struct PointSetMetadata {
  std::uint64_t seed = 0;
  std::string label;
  std::optional<double> intensity;       // Poisson samples
  std::optional<std::int64_t> count;     // fixed-count samples
  std::vector<std::string> restrictions;  // one note per restrict_to call

  friend bool operator==(const PointSetMetadata&,
                         const PointSetMetadata&) = default;
};

/// Finite multiset of planar points owned by a box. Points are stored in
/// lexicographic order; every point lies inside the box.
class PointSet {
 public:
  PointSet() = default;
  /// Validates membership and sorts the points canonically.
  PointSet(Box box, std::vector<Point> points, PointSetMetadata meta = {});

  const Box& box() const { return box_; }
  const std::vector<Point>& points() const { return points_; }
  const PointSetMetadata& metadata() const { return meta_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }

  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  /// Copy of this set translated by (dx,dy) inside a caller-supplied box.
  PointSet translated(double dx, double dy, const Box& new_box) const;

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  Box box_;
  std::vector<Point> points_;
  PointSetMetadata meta_;
};

/// Homogeneous Poisson process of the given intensity on `box`.
PointSet sample_poisson(const Box& box, double intensity, RngStream& rng);

/// Exactly n i.i.d. uniform points on `box`.
PointSet sample_uniform_n(const Box& box, std::int64_t n, RngStream& rng);

/// The points of `ps` inside `box` (closed-open membership).
PointSet restrict_to(const PointSet& ps, const Box& box);

/// CSV with header `x,y`, 17 significant digits per coordinate.
void write_points_csv(const PointSet& ps, const std::filesystem::path& path);
PointSet read_points_csv(const std::filesystem::path& path, const Box& box);

/// JSON sidecar with seed, label, box and intensity/count.
std::string metadata_json(const PointSet& ps);
void write_metadata_json(const PointSet& ps, const std::filesystem::path& path);
/// Loads a CSV + sidecar pair written by the two functions above.
PointSet read_point_set(const std::filesystem::path& csv_path,
                        const std::filesystem::path& json_path);

}  // namespace dyadot
