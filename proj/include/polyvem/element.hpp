#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "polyvem/geometry.hpp"
#include "polyvem/mesh.hpp"
#include "polyvem/parallel.hpp"
#include "polyvem/quadrature.hpp"

namespace polyvem {

/// Local Morley dofs: N vertex values followed by N edge integrals of the
/// outward normal derivative, both in cycle order.
using LocalDofs = Eigen::VectorXd;

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Vector(const Point&)>;
using MatrixField = std::function<Eigen::Matrix2d(const Point&)>;

/// Geometry of one polygon as seen by the element routines.
struct LocalGeometry {
  std::vector<Point> vertices;
  std::vector<Vector> tangents;  // counterclockwise
  std::vector<Vector> normals;   // outward
  std::vector<double> lengths;
  Point center = Point::Zero();
  double area = 0.0;
  double diameter = 0.0;
  double perimeter = 0.0;

  std::size_t size() const { return vertices.size(); }
  MonomialFrame frame() const { return {center, diameter}; }
  Point midpoint(std::size_t k) const { return 0.5 * (vertices[k] + vertices[(k + 1) % size()]); }
};

inline LocalGeometry local_geometry(std::span<const Point> cycle, const Point& center) {
  LocalGeometry g;
  g.vertices.assign(cycle.begin(), cycle.end());
  const std::size_t n = cycle.size();
  if (n < 3) throw GeometryError("local_geometry: fewer than three vertices");
  for (std::size_t k = 0; k < n; ++k) {
    const Vector d = cycle[(k + 1) % n] - cycle[k];
    const double len = d.norm();
    if (!(len > 0.0)) throw GeometryError("local_geometry: zero-length edge");
    g.tangents.push_back(d / len);
    g.normals.push_back(right_normal(d / len));
    g.lengths.push_back(len);
    g.perimeter += len;
  }
  g.center = center;
  g.area = signed_area(cycle);
  g.diameter = polygon_diameter(cycle);
  if (!(g.area > 0.0)) throw GeometryError("local_geometry: polygon is not counterclockwise");
  return g;
}

inline LocalGeometry local_geometry(std::span<const Point> cycle) {
  return local_geometry(cycle, polygon_centroid(cycle));
}

inline LocalGeometry local_geometry(const Mesh& mesh, Index p) {
  const std::vector<Point> pts = mesh.polygon_points(p);
  return local_geometry(pts, mesh.polygon(p).star_center);
}

/// A quadratic polynomial in scaled monomials of some frame.
struct Quadratic {
  MonomialFrame frame;
  Coefficients c = Coefficients::Zero();

  double value(const Point& x) const { return scaled_monomials(frame, x).dot(c); }

  Vector gradient(const Point& x) const {
    const double xi = (x.x() - frame.center.x()) / frame.h;
    const double eta = (x.y() - frame.center.y()) / frame.h;
    return Vector(c[1] + 2.0 * c[3] * xi + c[4] * eta, c[2] + c[4] * xi + 2.0 * c[5] * eta) / frame.h;
  }

  Eigen::Matrix2d hessian() const {
    const double s = 1.0 / (frame.h * frame.h);
    Eigen::Matrix2d H;
    H << 2.0 * c[3] * s, c[4] * s, c[4] * s, 2.0 * c[5] * s;
    return H;
  }

  /// The quadratic with the given value, gradient and Hessian at the frame center.
  static Quadratic from_taylor(const MonomialFrame& frame, double value, const Vector& gradient,
                               const Eigen::Matrix2d& hessian) {
    Quadratic q{frame, Coefficients::Zero()};
    const double h = frame.h;
    q.c << value, h * gradient.x(), h * gradient.y(), 0.5 * h * h * hessian(0, 0), h * h * hessian(0, 1),
        0.5 * h * h * hessian(1, 1);
    return q;
  }
};

/// Dofs of a smooth function: vertex values and Gauss-Legendre edge integrals
/// of grad(v) . n_P.
inline LocalDofs local_dofs_of_function(const LocalGeometry& geom, const ScalarField& value,
                                        const VectorField& gradient, int edge_order = kDefaultEdgeOrder) {
  const std::size_t n = geom.size();
  LocalDofs dofs(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    dofs[static_cast<Eigen::Index>(k)] = value(geom.vertices[k]);
    const Vector normal = geom.normals[k];
    dofs[static_cast<Eigen::Index>(n + k)] =
        integrate_edge(geom.vertices[k], geom.vertices[(k + 1) % n],
                       [&](const Point& x) { return gradient(x).dot(normal); }, edge_order);
  }
  return dofs;
}

/// Exact dofs of a quadratic: its normal derivative is affine on every edge,
/// so the midpoint rule integrates it exactly.
inline LocalDofs dofs_of_polynomial(const LocalGeometry& geom, const Quadratic& q) {
  const std::size_t n = geom.size();
  LocalDofs dofs(2 * n);
  for (std::size_t k = 0; k < n; ++k) {
    dofs[static_cast<Eigen::Index>(k)] = q.value(geom.vertices[k]);
    dofs[static_cast<Eigen::Index>(n + k)] = geom.lengths[k] * q.gradient(geom.midpoint(k)).dot(geom.normals[k]);
  }
  return dofs;
}

/// The elliptic projection G onto P2 as linear maps acting on local dofs.
struct Projector {
  MonomialFrame frame;
  /// 6 x 2N: dofs -> scaled monomial coefficients of Gv.
  Eigen::Matrix<double, 6, Eigen::Dynamic> coefficient_map;
  /// 3 x 2N: dofs -> (H11, H12, H22), the constant Hessian of Gv.
  Eigen::Matrix<double, 3, Eigen::Dynamic> hessian_map;
  /// 2N x 2N: Dof(v) -> Dof(Gv).
  Eigen::MatrixXd dof_map;

  Quadratic apply(const LocalDofs& dofs) const { return Quadratic{frame, coefficient_map * dofs}; }
};

/// Builds G from the boundary identity
///   |P| D^2 Gv = int_{dP} grad(v) (x) n ds,
///   int_{E(k)} grad(v) ds = dof_{N+k} n_k + (dof_{k+1} - dof_k) t_k,
/// followed by the boundary-mean gradient and vertex-mean value conditions.
inline Projector build_projector(const LocalGeometry& geom) {
  const std::size_t n = geom.size();
  const auto nn = static_cast<Eigen::Index>(n);
  const double h = geom.diameter;
  const MonomialFrame frame = geom.frame();

  Eigen::Matrix<double, 3, Eigen::Dynamic> hess = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, 2 * nn);
  Eigen::Matrix<double, 2, Eigen::Dynamic> grad_sum = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, 2 * nn);

  auto add = [&](Eigen::Index dof, const Vector& g, const Vector& normal) {
    grad_sum.col(dof) += g;
    hess(0, dof) += g.x() * normal.x() / geom.area;
    hess(1, dof) += 0.5 * (g.x() * normal.y() + g.y() * normal.x()) / geom.area;
    hess(2, dof) += g.y() * normal.y() / geom.area;
  };
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const auto next = static_cast<Eigen::Index>((k + 1) % n);
    const Vector& nk = geom.normals[k];
    const Vector& tk = geom.tangents[k];
    add(nn + kk, nk, nk);
    add(next, tk, nk);
    add(kk, -tk, nk);
  }

  // first moment of the boundary about the center
  Vector moment = Vector::Zero();
  for (std::size_t k = 0; k < n; ++k) moment += geom.lengths[k] * (geom.midpoint(k) - geom.center);

  Projector proj;
  proj.frame = frame;
  proj.hessian_map = hess;
  proj.coefficient_map = Eigen::Matrix<double, 6, Eigen::Dynamic>::Zero(6, 2 * nn);
  auto& M = proj.coefficient_map;
  for (Eigen::Index j = 0; j < 2 * nn; ++j) {
    Eigen::Matrix2d H;
    H << hess(0, j), hess(1, j), hess(1, j), hess(2, j);
    const Vector b = (grad_sum.col(j) - H * moment) / geom.perimeter;
    M(1, j) = h * b.x();
    M(2, j) = h * b.y();
    M(3, j) = 0.5 * h * h * H(0, 0);
    M(4, j) = h * h * H(0, 1);
    M(5, j) = 0.5 * h * h * H(1, 1);
  }
  // constant: mean of Gv over the vertices equals the mean vertex dof
  for (std::size_t k = 0; k < n; ++k) {
    const Coefficients m = scaled_monomials(frame, geom.vertices[k]);
    M.row(0) -= (m.tail<5>().transpose() * M.bottomRows<5>()) / static_cast<double>(n);
    M(0, static_cast<Eigen::Index>(k)) += 1.0 / static_cast<double>(n);
  }

  // Dof of each scaled monomial, exact
  Eigen::Matrix<double, Eigen::Dynamic, 6> mono_dofs(2 * nn, 6);
  for (Eigen::Index i = 0; i < 6; ++i) {
    Quadratic q{frame, Coefficients::Unit(i)};
    mono_dofs.col(i) = dofs_of_polynomial(geom, q);
  }
  proj.dof_map = mono_dofs * M;
  return proj;
}

/// Local stiffness contributions a^P(Gv, Gw) and S^P((1-G)v, (1-G)w).
struct LocalMatrices {
  Eigen::MatrixXd consistency;
  Eigen::MatrixXd stabilization;

  Eigen::MatrixXd total() const { return consistency + stabilization; }
};

inline LocalMatrices local_matrices(const LocalGeometry& geom, const Projector& proj) {
  const Eigen::Vector3d metric(1.0, 2.0, 1.0);  // D^2u : D^2v on (H11, H12, H22)
  LocalMatrices lm;
  lm.consistency = geom.area * proj.hessian_map.transpose() * metric.asDiagonal() * proj.hessian_map;
  const auto ndof = proj.dof_map.rows();
  const Eigen::MatrixXd residual = Eigen::MatrixXd::Identity(ndof, ndof) - proj.dof_map;
  lm.stabilization = (residual.transpose() * residual) / (geom.diameter * geom.diameter);
  return lm;
}

/// Everything the global routines need per polygon.
struct Element {
  LocalGeometry geometry;
  Projector projector;
  LocalMatrices matrices;
};

inline Element build_element(const Mesh& mesh, Index p) {
  Element el;
  el.geometry = local_geometry(mesh, p);
  el.projector = build_projector(el.geometry);
  el.matrices = local_matrices(el.geometry, el.projector);
  return el;
}

inline std::vector<Element> build_elements(const Mesh& mesh) {
  std::vector<Element> elements(mesh.num_polygons());
  parallel_for(mesh.num_polygons(), [&](std::size_t p) { elements[p] = build_element(mesh, p); });
  return elements;
}

}  // namespace polyvem
