#include "dyadot/point_process.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dyadot/errors.hpp"
#include "json.hpp"

namespace dyadot {

using nlohmann::json;

PointSet::PointSet(Box box, std::vector<Point> points, PointSetMetadata meta)
    : box_(box), points_(std::move(points)), meta_(std::move(meta)) {
  for (const Point& p : points_) {
    if (!box_.contains(p)) {
      throw std::invalid_argument("PointSet: point outside its box");
    }
  }
  std::sort(points_.begin(), points_.end());
}

PointSet PointSet::translated(double dx, double dy, const Box& new_box) const {
  std::vector<Point> moved;
  moved.reserve(points_.size());
  for (const Point& p : points_) moved.push_back({p.x + dx, p.y + dy});
  return PointSet(new_box, std::move(moved), meta_);
}

namespace {

Point uniform_point(const Box& box, RngStream& rng) {
  // Rounding can land exactly on the open edge; fold it back inside.
  double x = box.x0 + rng.uniform() * box.width();
  double y = box.y0 + rng.uniform() * box.height();
  if (x >= box.x1) x = std::nextafter(box.x1, box.x0);
  if (y >= box.y1) y = std::nextafter(box.y1, box.y0);
  return {x, y};
}

}  // namespace

PointSet sample_poisson(const Box& box, double intensity, RngStream& rng) {
  if (!std::isfinite(intensity) || intensity < 0.0) {
    throw std::invalid_argument("sample_poisson: intensity must be finite and >= 0");
  }
  PointSetMetadata meta{rng.seed(), rng.label(), intensity, std::nullopt, {}};
  const double mean = intensity * box.area();
  if (mean == 0.0) return PointSet(box, {}, std::move(meta));
  std::poisson_distribution<std::int64_t> count_law(mean);
  const std::int64_t n = count_law(rng);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) pts.push_back(uniform_point(box, rng));
  return PointSet(box, std::move(pts), std::move(meta));
}

PointSet sample_uniform_n(const Box& box, std::int64_t n, RngStream& rng) {
  if (n < 0) throw std::invalid_argument("sample_uniform_n: n must be >= 0");
  PointSetMetadata meta{rng.seed(), rng.label(), std::nullopt, n, {}};
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) pts.push_back(uniform_point(box, rng));
  return PointSet(box, std::move(pts), std::move(meta));
}

PointSet restrict_to(const PointSet& ps, const Box& box) {
  std::vector<Point> kept;
  for (const Point& p : ps) {
    if (box.contains(p)) kept.push_back(p);
  }
  PointSetMetadata meta = ps.metadata();
  char note[160];
  std::snprintf(note, sizeof note, "restricted to [%.17g,%.17g)x[%.17g,%.17g)",
                box.x0, box.x1, box.y0, box.y1);
  meta.restrictions.emplace_back(note);
  return PointSet(box, std::move(kept), std::move(meta));
}

void write_points_csv(const PointSet& ps, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "x,y\n";
  char line[96];
  for (const Point& p : ps) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", p.x, p.y);
    out << line;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

PointSet read_points_csv(const std::filesystem::path& path, const Box& box) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "x,y") {
    throw IoError(path.string() + ": expected header 'x,y'");
  }
  std::vector<Point> pts;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw IoError(path.string() + ":" + std::to_string(row) +
                               ": malformed row");
    }
    pts.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  return PointSet(box, std::move(pts));
}

std::string metadata_json(const PointSet& ps) {
  const auto& m = ps.metadata();
  json j;
  j["seed"] = m.seed;
  j["label"] = m.label;
  j["box"] = {ps.box().x0, ps.box().y0, ps.box().x1, ps.box().y1};
  j["intensity"] = m.intensity ? json(*m.intensity) : json(nullptr);
  j["count"] = m.count ? json(*m.count) : json(nullptr);
  j["size"] = ps.size();
  j["restrictions"] = m.restrictions;
  return j.dump(2);
}

void write_metadata_json(const PointSet& ps, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << metadata_json(ps) << '\n';
}

PointSet read_point_set(const std::filesystem::path& csv_path,
                        const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open " + json_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(json_path.string() + ": " + e.what());
  }
  const auto b = j.at("box");
  const Box box(b.at(0), b.at(1), b.at(2), b.at(3));
  PointSet raw = read_points_csv(csv_path, box);
  PointSetMetadata meta;
  meta.seed = j.at("seed");
  meta.label = j.at("label");
  if (!j.at("intensity").is_null()) meta.intensity = j.at("intensity").get<double>();
  if (!j.at("count").is_null()) meta.count = j.at("count").get<std::int64_t>();
  meta.restrictions = j.value("restrictions", std::vector<std::string>{});
  return PointSet(box, raw.points(), std::move(meta));
}

}  // namespace dyadot
