#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace polyvem {

using Index = std::size_t;
inline constexpr Index npos = std::numeric_limits<Index>::max();

using Point = Eigen::Vector2d;
using Vector = Eigen::Vector2d;

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GeometryError : Error {
  using Error::Error;
};

inline double cross(const Vector& a, const Vector& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Signed area of the triangle (a, b, c); positive when counterclockwise.
inline double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * cross(b - a, c - a);
}

/// Shoelace formula.
inline double signed_area(std::span<const Point> cycle) {
  double twice = 0.0;
  const std::size_t n = cycle.size();
  for (std::size_t k = 0; k < n; ++k) {
    twice += cross(cycle[k], cycle[(k + 1) % n]);
  }
  return 0.5 * twice;
}

/// Area centroid of a simple polygon.
inline Point polygon_centroid(std::span<const Point> cycle) {
  const std::size_t n = cycle.size();
  // shift to the first vertex for better cancellation behaviour
  const Point origin = cycle[0];
  double twice = 0.0;
  Point moment = Point::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    const Point a = cycle[k] - origin;
    const Point b = cycle[(k + 1) % n] - origin;
    const double w = cross(a, b);
    twice += w;
    moment += w * (a + b);
  }
  if (twice == 0.0) {
    throw GeometryError("polygon_centroid: zero-area polygon");
  }
  return origin + moment / (3.0 * twice);
}

inline double polygon_diameter(std::span<const Point> cycle) {
  double d = 0.0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    for (std::size_t j = i + 1; j < cycle.size(); ++j) {
      d = std::max(d, (cycle[i] - cycle[j]).norm());
    }
  }
  return d;
}

/// Outward unit normal of a segment traversed from a to b along a
/// counterclockwise boundary: the tangent rotated by -90 degrees.
inline Vector right_normal(const Vector& tangent) { return {tangent.y(), -tangent.x()}; }

/// Euclidean distance from a point to the segment [a, b].
inline double distance_to_segment(const Point& p, const Point& a, const Point& b) {
  const Vector d = b - a;
  const double len2 = d.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (a + s * d - p).norm();
}

/// Distance from a point to a closed polygon region (zero inside).
inline double distance_to_polygon(const Point& p, std::span<const Point> cycle) {
  const std::size_t n = cycle.size();
  bool inside = false;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const Point& a = cycle[k];
    const Point& b = cycle[(k + 1) % n];
    dist = std::min(dist, distance_to_segment(p, a, b));
    // even-odd ray casting
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double xs = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < xs) inside = !inside;
    }
  }
  return inside ? 0.0 : dist;
}

}  // namespace polyvem
