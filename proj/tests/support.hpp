#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "polyvem/polyvem.hpp"

namespace polyvem::testing {

/// Random polygon with 3..8 vertices, star-shaped with respect to its
/// centroid and with edges that are not too short relative to the diameter.
inline std::vector<Point> random_polygon(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (;;) {
    std::vector<double> angles(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (auto& a : angles) {
      acc += 0.4 + unit(rng);
      a = acc;
    }
    const double offset = two_pi * unit(rng);
    const double scale = two_pi / (acc + 0.4 + unit(rng));
    std::vector<Point> pts;
    const Point shift(2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0);
    const double size = 0.05 + unit(rng);
    for (double a : angles) {
      const double r = size * (0.6 + 0.4 * unit(rng));
      const double t = offset + a * scale;
      pts.push_back(shift + r * Point(std::cos(t), std::sin(t)));
    }
    const Point c = polygon_centroid(pts);
    bool ok = signed_area(std::span<const Point>(pts)) > 0.0;
    for (int k = 0; ok && k < n; ++k) {
      const Point& a = pts[static_cast<std::size_t>(k)];
      const Point& b = pts[static_cast<std::size_t>((k + 1) % n)];
      ok = signed_area(c, a, b) > 1e-3 * size * size && (b - a).norm() > 0.05 * size;
    }
    if (ok) return pts;
  }
}

/// A polynomial of total degree <= 4 given by its monomial coefficients
/// c[i][j] for x^i y^j, with exact derivatives.
struct Polynomial {
  double c[5][5] = {};

  static Polynomial random(std::mt19937& rng, int degree = 4) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    Polynomial p;
    for (int i = 0; i <= degree; ++i) {
      for (int j = 0; i + j <= degree; ++j) p.c[i][j] = coef(rng);
    }
    return p;
  }

  static Polynomial monomial(int i, int j) {
    Polynomial p;
    p.c[i][j] = 1.0;
    return p;
  }

  double derivative(const Point& x, int dx, int dy) const {
    double s = 0.0;
    for (int i = dx; i < 5; ++i) {
      for (int j = dy; j < 5; ++j) {
        if (c[i][j] == 0.0) continue;
        double f = c[i][j];
        for (int k = 0; k < dx; ++k) f *= i - k;
        for (int k = 0; k < dy; ++k) f *= j - k;
        s += f * std::pow(x.x(), i - dx) * std::pow(x.y(), j - dy);
      }
    }
    return s;
  }

  double value(const Point& x) const { return derivative(x, 0, 0); }
  Vector gradient(const Point& x) const { return {derivative(x, 1, 0), derivative(x, 0, 1)}; }
  Eigen::Matrix2d hessian(const Point& x) const {
    Eigen::Matrix2d h;
    h << derivative(x, 2, 0), derivative(x, 1, 1), derivative(x, 1, 1), derivative(x, 0, 2);
    return h;
  }

  ScalarField value_fn() const {
    return [p = *this](const Point& x) { return p.value(x); };
  }
  VectorField gradient_fn() const {
    return [p = *this](const Point& x) { return p.gradient(x); };
  }
};

/// Direct-definition oracle for G v: the three Hessian equations
/// a^P(Gv, chi) = a^P(v, chi) for chi in {xi^2, xi eta, eta^2} by polygon
/// quadrature, then the boundary-mean gradient and vertex-mean value.
inline Coefficients projector_oracle(const LocalGeometry& geom, const ScalarField& value, const VectorField& gradient,
                                     const MatrixField& hessian, int degree = 10, int edge_order = 5) {
  const double h = geom.diameter;
  const double s = 1.0 / (h * h);
  // D^2 of xi^2, xi eta, eta^2 as (H11, H12, H22)
  const Eigen::Matrix3d chi{{2.0 * s, 0.0, 0.0}, {0.0, s, 0.0}, {0.0, 0.0, 2.0 * s}};
  const Eigen::Vector3d metric(1.0, 2.0, 1.0);
  Eigen::Matrix3d lhs;
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 3; ++k) {
      lhs(r, k) = geom.area * (metric.asDiagonal() * chi.row(k).transpose()).dot(chi.row(r).transpose());
    }
  }
  const QuadraturePoints qp = polygon_quadrature(geom.vertices, geom.center, degree);
  for (std::size_t q = 0; q < qp.points.size(); ++q) {
    const Eigen::Matrix2d H = hessian(qp.points[q]);
    const Eigen::Vector3d hv(H(0, 0), H(0, 1), H(1, 1));
    for (int r = 0; r < 3; ++r) rhs[r] += qp.weights[q] * (metric.asDiagonal() * hv).dot(chi.row(r).transpose());
  }
  const Eigen::Vector3d quad = lhs.fullPivLu().solve(rhs);

  Coefficients c = Coefficients::Zero();
  c.tail<3>() = quad;
  const Quadratic q2{geom.frame(), c};

  // boundary mean of grad(v - q2) fixes the linear part
  const std::size_t n = geom.size();
  Vector mean_grad = Vector::Zero();
  for (std::size_t k = 0; k < n; ++k) {
    const Point& a = geom.vertices[k];
    const Point& b = geom.vertices[(k + 1) % n];
    mean_grad.x() += integrate_edge(a, b, [&](const Point& x) { return gradient(x).x() - q2.gradient(x).x(); },
                                    edge_order);
    mean_grad.y() += integrate_edge(a, b, [&](const Point& x) { return gradient(x).y() - q2.gradient(x).y(); },
                                    edge_order);
  }
  mean_grad /= geom.perimeter;
  c[1] = h * mean_grad.x();
  c[2] = h * mean_grad.y();

  double mean_value = 0.0;
  const Quadratic q1{geom.frame(), c};
  for (const Point& z : geom.vertices) mean_value += value(z) - q1.value(z);
  c[0] = mean_value / static_cast<double>(n);
  return c;
}

/// Exhaustive minimal cardinality of a subset reaching theta * total.
inline std::size_t minimal_cardinality(const std::vector<double>& values, double theta) {
  const std::size_t n = values.size();
  double total = 0.0;
  for (double v : values) total += v;
  std::size_t best = n;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        sum += values[i];
        ++count;
      }
    }
    if (sum >= theta * total && count < best) best = count;
  }
  return best;
}

}  // namespace polyvem::testing
