#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyvem/element.hpp"
#include "polyvem/jet.hpp"
#include "polyvem/mesh.hpp"
#include "polyvem/parallel.hpp"
#include "polyvem/quadrature.hpp"
#include "polyvem/system.hpp"
#include "polyvem/zshape_profile.hpp"

namespace polyvem {

/// Exact solution of a benchmark with derivatives up to second order and
/// the source f = bilaplacian(u). An empty source means f = 0.
struct ExactSolution {
  std::string domain;
  ScalarField value;
  VectorField gradient;
  MatrixField hessian;
  ScalarField source;
  double sigma = 1.0;
};

/// |u - G u_h|_{1,pw} and |u - G u_h|_{2,pw}.
struct ErrorReport {
  double h1e = 0.0;
  double h2e = 0.0;
};

/// u = r^{5/3} sin(5 theta / 3) with theta in [0, 3 pi / 2], f = 0.
inline ExactSolution lshape_solution() {
  constexpr double alpha = 5.0 / 3.0;
  auto power = [](const Point& x, double k) {
    const double r = ad::polar_radius(x.x(), x.y());
    const double t = ad::polar_angle(x.x(), x.y());
    return std::polar(std::pow(r, k), k * t);
  };
  ExactSolution s;
  s.domain = "lshape";
  s.sigma = 2.0 / 3.0;
  s.value = [=](const Point& x) {
    if (x.norm() == 0.0) return 0.0;
    return power(x, alpha).imag();
  };
  s.gradient = [=](const Point& x) -> Vector {
    if (x.norm() == 0.0) return Vector::Zero();
    const std::complex<double> d = alpha * power(x, alpha - 1.0);
    return {d.imag(), d.real()};
  };
  s.hessian = [=](const Point& x) -> Eigen::Matrix2d {
    if (x.norm() == 0.0) {
      return Eigen::Matrix2d::Constant(std::numeric_limits<double>::quiet_NaN());
    }
    const std::complex<double> d = alpha * (alpha - 1.0) * power(x, alpha - 2.0);
    Eigen::Matrix2d H;
    H << d.imag(), d.real(), d.real(), -d.imag();
    return H;
  };
  return s;
}

/// Jet of (1 - x^2)^2 (1 - y^2)^2 r^{1+z} g(theta) at (x0, y0), theta in [0, omega].
template <int N>
ad::Jet<N> zshape_jet(double x0, double y0, const AngularProfile& g) {
  using J = ad::Jet<N>;
  const J x = J::variable_x(x0);
  const J y = J::variable_y(y0);
  const J cx = J(1.0) - x * x;
  const J cy = J(1.0) - y * y;
  const J r = ad::polar_radius(x, y);
  const J theta = ad::polar_angle(x, y);
  const auto all = g(theta.value());
  std::array<double, N + 1> d{};
  for (int k = 0; k <= N; ++k) d[static_cast<std::size_t>(k)] = all[static_cast<std::size_t>(k)];
  return cx * cx * cy * cy * ad::pow(r, 1.0 + g.exponent) * compose(theta, d);
}

/// Clamped Z-shape solution with the singular corner at the origin. Throws if
/// no angular profile is supplied.
inline ExactSolution zshape_solution(const AngularProfile& g) {
  if (!g) throw Error("zshape benchmark disabled: no angular profile g(theta) supplied");
  ExactSolution s;
  s.domain = "zshape";
  s.sigma = g.exponent;
  s.value = [g](const Point& x) {
    if (x.norm() == 0.0) return 0.0;
    return zshape_jet<0>(x.x(), x.y(), g).value();
  };
  s.gradient = [g](const Point& x) -> Vector {
    if (x.norm() == 0.0) return Vector::Zero();
    const auto j = zshape_jet<1>(x.x(), x.y(), g);
    return {j.derivative(1, 0), j.derivative(0, 1)};
  };
  s.hessian = [g](const Point& x) -> Eigen::Matrix2d {
    if (x.norm() == 0.0) return Eigen::Matrix2d::Constant(std::numeric_limits<double>::quiet_NaN());
    const auto j = zshape_jet<2>(x.x(), x.y(), g);
    Eigen::Matrix2d H;
    H << j.derivative(2, 0), j.derivative(1, 1), j.derivative(1, 1), j.derivative(0, 2);
    return H;
  };
  s.source = [g](const Point& x) {
    if (x.norm() == 0.0) return std::numeric_limits<double>::quiet_NaN();
    const auto j = zshape_jet<4>(x.x(), x.y(), g);
    return j.derivative(4, 0) + 2.0 * j.derivative(2, 2) + j.derivative(0, 4);
  };
  return s;
}

/// u = sin^2(pi x) sin^2(pi y) on the unit square.
inline ExactSolution smooth_square_solution() {
  using std::numbers::pi;
  struct Factor {
    double v, d1, d2, d4;
  };
  auto factor = [](double t) {
    const double s = std::sin(pi * t);
    return Factor{s * s, pi * std::sin(2.0 * pi * t), 2.0 * pi * pi * std::cos(2.0 * pi * t),
                  -8.0 * pi * pi * pi * pi * std::cos(2.0 * pi * t)};
  };
  ExactSolution s;
  s.domain = "unit_square";
  s.sigma = 1.0;
  s.value = [=](const Point& x) { return factor(x.x()).v * factor(x.y()).v; };
  s.gradient = [=](const Point& x) -> Vector {
    const Factor a = factor(x.x());
    const Factor b = factor(x.y());
    return {a.d1 * b.v, a.v * b.d1};
  };
  s.hessian = [=](const Point& x) -> Eigen::Matrix2d {
    const Factor a = factor(x.x());
    const Factor b = factor(x.y());
    Eigen::Matrix2d H;
    H << a.d2 * b.v, a.d1 * b.d1, a.d1 * b.d1, a.v * b.d2;
    return H;
  };
  s.source = [=](const Point& x) {
    const Factor a = factor(x.x());
    const Factor b = factor(x.y());
    return a.d4 * b.v + 2.0 * a.d2 * b.d2 + a.v * b.d4;
  };
  return s;
}

/// A full quadratic with inhomogeneous boundary data and f = 0.
inline ExactSolution patch_solution() {
  ExactSolution s;
  s.domain = "unit_square";
  s.sigma = 1.0;
  s.value = [](const Point& p) {
    const double x = p.x();
    const double y = p.y();
    return 0.5 + x - 0.5 * y + 2.0 * x * x - 1.5 * x * y + y * y;
  };
  s.gradient = [](const Point& p) -> Vector { return {1.0 + 4.0 * p.x() - 1.5 * p.y(), -0.5 - 1.5 * p.x() + 2.0 * p.y()}; };
  s.hessian = [](const Point&) -> Eigen::Matrix2d {
    Eigen::Matrix2d H;
    H << 4.0, -1.5, -1.5, 2.0;
    return H;
  };
  return s;
}

/// (-1,1)^2 minus [0,1)x(-1,0] as three unit squares.
inline Mesh lshape_mesh() {
  std::vector<Point> v{{-1, -1}, {0, -1}, {-1, 0}, {0, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}};
  return build_mesh(std::move(v), {{0, 1, 3, 2}, {2, 3, 6, 5}, {3, 4, 7, 6}});
}

/// (-1,1)^2 minus the triangle (0,0),(1,0),(1,-1): three squares and a triangle.
inline Mesh zshape_mesh() {
  std::vector<Point> v{{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {0, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}};
  return build_mesh(std::move(v), {{0, 1, 4, 3}, {3, 4, 7, 6}, {4, 5, 8, 7}, {1, 2, 4}});
}

inline Mesh unit_square_mesh(std::size_t n = 2) { return rectangle_grid(0.0, 1.0, 0.0, 1.0, n, n); }

/// n-by-n grid of the unit square with interior vertices moved randomly by up
/// to amplitude / n in each coordinate.
inline Mesh perturbed_square_mesh(std::size_t n, double amplitude, unsigned seed) {
  const Mesh base = unit_square_mesh(n);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> shift(-amplitude / static_cast<double>(n), amplitude / static_cast<double>(n));
  std::vector<Point> v = base.vertices();
  for (Index i = 0; i < v.size(); ++i) {
    if (!base.is_boundary_vertex(i)) v[i] += Vector(shift(rng), shift(rng));
  }
  std::vector<std::vector<Index>> cycles;
  for (const Polygon& p : base.polygons()) cycles.push_back(p.vertices);
  return build_mesh(std::move(v), std::move(cycles));
}

/// Piecewise seminorm errors with polygon quadrature of the given degree.
inline ErrorReport error_norms(const Mesh& mesh, const DiscreteSolution& sol, const ExactSolution& exact,
                               int degree = kDefaultPolygonDegree) {
  std::vector<double> e1(mesh.num_polygons(), 0.0);
  std::vector<double> e2(mesh.num_polygons(), 0.0);
  parallel_for(mesh.num_polygons(), [&](std::size_t p) {
    const QuadraturePoints qp = polygon_quadrature(mesh, p, degree);
    const Quadratic& g = sol.projections[p];
    const Eigen::Matrix2d hg = g.hessian();
    for (std::size_t q = 0; q < qp.points.size(); ++q) {
      const Point& x = qp.points[q];
      e1[p] += qp.weights[q] * (exact.gradient(x) - g.gradient(x)).squaredNorm();
      e2[p] += qp.weights[q] * (exact.hessian(x) - hg).squaredNorm();
    }
  });
  ErrorReport r;
  for (Index p = 0; p < mesh.num_polygons(); ++p) {
    r.h1e += e1[p];
    r.h2e += e2[p];
  }
  r.h1e = std::sqrt(r.h1e);
  r.h2e = std::sqrt(r.h2e);
  return r;
}

/// A named problem: exact solution, initial mesh and boundary data from u.
struct Benchmark {
  std::string name;
  ExactSolution exact;
  Mesh initial_mesh;
};

inline std::vector<std::string> benchmark_names() { return {"lshape", "zshape", "smooth_square", "patch_p2"}; }

inline Benchmark make_benchmark(const std::string& name) {
  if (name == "lshape") return {name, lshape_solution(), lshape_mesh()};
  if (name == "zshape") {
    const AngularProfile g = grisvard_profile();
    if (auto failure = check_profile(g)) throw Error("zshape benchmark disabled: " + *failure);
    return {name, zshape_solution(g), zshape_mesh()};
  }
  if (name == "smooth_square") return {name, smooth_square_solution(), unit_square_mesh(8)};
  if (name == "patch_p2") return {name, patch_solution(), unit_square_mesh(2)};
  throw Error("unknown benchmark '" + name + "'");
}

inline ProblemData problem_data(const ExactSolution& exact) {
  return {exact.source, exact.value, exact.gradient};
}

}  // namespace polyvem
