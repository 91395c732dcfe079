#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "polyvem/geometry.hpp"
#include "polyvem/mesh.hpp"

namespace polyvem {

/// Gauss-Legendre rule on [0, 1]; exact for polynomials of degree 2n-1.
struct EdgeRule {
  int order = 0;
  std::vector<double> points;
  std::vector<double> weights;
};

/// Collapsed (Duffy) product Gauss rule on the unit triangle in barycentric
/// form. Weights are positive and sum to one.
struct TriangleRule {
  int degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

inline constexpr int kDefaultPolygonDegree = 10;
inline constexpr int kDefaultEdgeOrder = 5;
inline constexpr int kMaxRuleDegree = 40;

namespace detail {

inline EdgeRule compute_gauss_legendre(int n) {
  EdgeRule rule;
  rule.order = n;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 - x);
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
  }
  return rule;
}

inline TriangleRule compute_triangle_rule(int degree) {
  // The Duffy collapse adds one degree in the radial direction.
  const int n = std::max(1, (degree + 2 + 1) / 2);
  const EdgeRule gl = compute_gauss_legendre(n);
  TriangleRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = gl.points[static_cast<std::size_t>(i)];
      const double v = gl.points[static_cast<std::size_t>(j)];
      const double s = u;
      const double t = v * (1.0 - u);
      rule.points.push_back({1.0 - s - t, s, t});
      // reference area 1/2 normalised to 1
      rule.weights.push_back(2.0 * gl.weights[static_cast<std::size_t>(i)] *
                             gl.weights[static_cast<std::size_t>(j)] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace detail

inline const EdgeRule& gauss_legendre(int order) {
  static const std::vector<EdgeRule> table = [] {
    std::vector<EdgeRule> t;
    for (int n = 0; n <= kMaxRuleDegree; ++n) t.push_back(n == 0 ? EdgeRule{} : detail::compute_gauss_legendre(n));
    return t;
  }();
  if (order < 1 || order > kMaxRuleDegree) throw Error("gauss_legendre: unsupported order");
  return table[static_cast<std::size_t>(order)];
}

inline const TriangleRule& triangle_rule(int degree) {
  static const std::vector<TriangleRule> table = [] {
    std::vector<TriangleRule> t;
    for (int d = 0; d <= kMaxRuleDegree; ++d) t.push_back(detail::compute_triangle_rule(d));
    return t;
  }();
  if (degree < 0 || degree > kMaxRuleDegree) throw Error("triangle_rule: unsupported degree");
  return table[static_cast<std::size_t>(degree)];
}

/// Physical quadrature points and weights on a polygon.
struct QuadraturePoints {
  std::vector<Point> points;
  std::vector<double> weights;

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t q = 0; q < points.size(); ++q) sum += weights[q] * f(points[q]);
    return sum;
  }
};

/// Maps the triangle rule onto every star sub-triangle (center, z_k, z_{k+1}).
inline QuadraturePoints polygon_quadrature(std::span<const Point> cycle, const Point& center, int degree) {
  const TriangleRule& rule = triangle_rule(degree);
  QuadraturePoints qp;
  const std::size_t n = cycle.size();
  qp.points.reserve(n * rule.weights.size());
  qp.weights.reserve(n * rule.weights.size());
  for (std::size_t k = 0; k < n; ++k) {
    const Point& a = cycle[k];
    const Point& b = cycle[(k + 1) % n];
    const double area = signed_area(center, a, b);
    if (!(area > 0.0)) throw GeometryError("polygon_quadrature: degenerate sub-triangle");
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.points[q];
      qp.points.push_back(l[0] * center + l[1] * a + l[2] * b);
      qp.weights.push_back(area * rule.weights[q]);
    }
  }
  return qp;
}

inline QuadraturePoints polygon_quadrature(const Mesh& mesh, Index p, int degree) {
  const std::vector<Point> pts = mesh.polygon_points(p);
  return polygon_quadrature(pts, mesh.polygon(p).star_center, degree);
}

template <class F>
double integrate_triangle(const Point& a, const Point& b, const Point& c, F&& f, int degree) {
  const TriangleRule& rule = triangle_rule(degree);
  const double area = std::abs(signed_area(a, b, c));
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    const auto& l = rule.points[q];
    sum += rule.weights[q] * f(Point(l[0] * a + l[1] * b + l[2] * c));
  }
  return area * sum;
}

template <class F>
double integrate_polygon(std::span<const Point> cycle, const Point& center, F&& f,
                         int degree = kDefaultPolygonDegree) {
  return polygon_quadrature(cycle, center, degree).integrate(f);
}

template <class F>
double integrate_polygon(const Mesh& mesh, Index p, F&& f, int degree = kDefaultPolygonDegree) {
  return polygon_quadrature(mesh, p, degree).integrate(f);
}

/// Gauss-Legendre quadrature of f along the segment [a, b] (arc length).
template <class F>
double integrate_edge(const Point& a, const Point& b, F&& f, int order = kDefaultEdgeOrder) {
  const double len = (b - a).norm();
  if (!(len > 0.0)) throw GeometryError("integrate_edge: zero-length edge");
  const EdgeRule& rule = gauss_legendre(order);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    sum += rule.weights[q] * f(Point(a + rule.points[q] * (b - a)));
  }
  return len * sum;
}

/// Scaled monomial frame: xi = (x - center) / h.
struct MonomialFrame {
  Point center = Point::Zero();
  double h = 1.0;
};

using Coefficients = Eigen::Matrix<double, 6, 1>;

/// Values of {1, xi, eta, xi^2, xi*eta, eta^2} at x.
inline Coefficients scaled_monomials(const MonomialFrame& frame, const Point& x) {
  const double xi = (x.x() - frame.center.x()) / frame.h;
  const double eta = (x.y() - frame.center.y()) / frame.h;
  Coefficients m;
  m << 1.0, xi, eta, xi * xi, xi * eta, eta * eta;
  return m;
}

/// L2(P)-orthogonal projection of f onto P2(P) in the scaled monomial basis.
template <class F>
Coefficients l2_project_p2(const QuadraturePoints& qp, const MonomialFrame& frame, F&& f) {
  Eigen::Matrix<double, 6, 6> mass = Eigen::Matrix<double, 6, 6>::Zero();
  Coefficients rhs = Coefficients::Zero();
  for (std::size_t q = 0; q < qp.points.size(); ++q) {
    const Coefficients m = scaled_monomials(frame, qp.points[q]);
    mass.noalias() += qp.weights[q] * m * m.transpose();
    rhs += qp.weights[q] * f(qp.points[q]) * m;
  }
  Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(mass);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
    throw GeometryError("l2_project_p2: singular mass matrix (degenerate polygon)");
  }
  return ldlt.solve(rhs);
}

template <class F>
Coefficients l2_project_p2(const Mesh& mesh, Index p, F&& f, int degree = kDefaultPolygonDegree) {
  const Polygon& poly = mesh.polygon(p);
  return l2_project_p2(polygon_quadrature(mesh, p, degree), MonomialFrame{poly.star_center, poly.diameter},
                       std::forward<F>(f));
}

}  // namespace polyvem
