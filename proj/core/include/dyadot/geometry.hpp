#pragma once

#include <cmath>
#include <stdexcept>

namespace dyadot {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

inline double squared_distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(const Point& a, const Point& b) {
  return std::sqrt(squared_distance(a, b));
}

/// Axis-aligned box [x0,x1) x [y0,y1). Membership is closed-open so that
/// dyadic children tile their parent without double counting.
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  Box() = default;
  Box(double x0_, double y0_, double x1_, double y1_)
      : x0(x0_), y0(y0_), x1(x1_), y1(y1_) {
    if (!(std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) &&
          std::isfinite(y1)) ||
        !(x0 < x1) || !(y0 < y1)) {
      throw std::invalid_argument("Box: degenerate or non-finite bounds");
    }
  }

  static Box square(double side) { return Box(0.0, 0.0, side, side); }

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  Point center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }

  bool contains(const Point& p) const {
    return p.x >= x0 && p.x < x1 && p.y >= y0 && p.y < y1;
  }
  bool contains(const Box& b) const {
    return b.x0 >= x0 && b.x1 <= x1 && b.y0 >= y0 && b.y1 <= y1;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

}  // namespace dyadot
