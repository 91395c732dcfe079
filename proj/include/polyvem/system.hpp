#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "polyvem/element.hpp"
#include "polyvem/mesh.hpp"
#include "polyvem/quadrature.hpp"

namespace polyvem {

struct SolverError : Error {
  using Error::Error;
};

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Global Morley dofs: vertex values 0..|V|-1, then edge normal-derivative
/// integrals |V|..|V|+|E|-1 with respect to the global edge normals.
struct DofMap {
  std::size_t num_vertices = 0;
  std::size_t num_edges = 0;
  std::vector<std::vector<Index>> global;  // per polygon, local -> global
  std::vector<std::vector<double>> sign;   // per polygon, local = sign * global
  std::vector<char> constrained;           // boundary dofs

  std::size_t size() const { return num_vertices + num_edges; }
  std::size_t num_free() const {
    return size() - static_cast<std::size_t>(std::count(constrained.begin(), constrained.end(), 1));
  }

  LocalDofs local(Index p, const Eigen::VectorXd& values) const {
    const auto& g = global[p];
    LocalDofs out(static_cast<Eigen::Index>(g.size()));
    for (std::size_t j = 0; j < g.size(); ++j) {
      out[static_cast<Eigen::Index>(j)] = sign[p][j] * values[static_cast<Eigen::Index>(g[j])];
    }
    return out;
  }
};

inline DofMap build_dof_map(const Mesh& mesh) {
  DofMap map;
  map.num_vertices = mesh.num_vertices();
  map.num_edges = mesh.num_edges();
  map.global.resize(mesh.num_polygons());
  map.sign.resize(mesh.num_polygons());
  for (Index p = 0; p < mesh.num_polygons(); ++p) {
    const Polygon& poly = mesh.polygon(p);
    const std::size_t n = poly.size();
    auto& g = map.global[p];
    auto& s = map.sign[p];
    g.resize(2 * n);
    s.assign(2 * n, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
      g[k] = poly.vertices[k];
      g[n + k] = map.num_vertices + poly.edges[k];
      s[n + k] = mesh.edge_sign(p, k);
    }
  }
  map.constrained.assign(map.size(), 0);
  for (Index v = 0; v < mesh.num_vertices(); ++v) map.constrained[v] = mesh.is_boundary_vertex(v) ? 1 : 0;
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    map.constrained[map.num_vertices + e] = mesh.edge(e).on_boundary() ? 1 : 0;
  }
  return map;
}

/// A_global = sum_P S_P^T K_P S_P with signed scatter S_P. Triplets are
/// merged in polygon order, so the result does not depend on threading.
inline SparseMatrix assemble(const Mesh& mesh, const DofMap& map, const std::vector<Element>& elements) {
  if (elements.size() != mesh.num_polygons()) throw Error("assemble: element count does not match the mesh");
  std::vector<Eigen::Triplet<double>> triplets;
  std::size_t nnz = 0;
  for (const auto& g : map.global) nnz += g.size() * g.size();
  triplets.reserve(nnz);
  const auto n = static_cast<Eigen::Index>(map.size());
  for (Index p = 0; p < mesh.num_polygons(); ++p) {
    const Eigen::MatrixXd K = elements[p].matrices.total();
    const auto& g = map.global[p];
    const auto& s = map.sign[p];
    if (static_cast<std::size_t>(K.rows()) != g.size()) throw Error("assemble: local matrix size mismatch");
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = 0; j < g.size(); ++j) {
        const auto gi = static_cast<Eigen::Index>(g[i]);
        const auto gj = static_cast<Eigen::Index>(g[j]);
        if (gi >= n || gj >= n) throw Error("assemble: dof index out of range");
        triplets.emplace_back(gi, gj,
                              s[i] * s[j] * K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    }
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(triplets.begin(), triplets.end());
  return A;
}

/// Interpolated boundary data: u at boundary vertices and the edge integral of
/// grad(u) . n_E on boundary edges. Free entries are zero.
inline Eigen::VectorXd boundary_data(const Mesh& mesh, const DofMap& map, const ScalarField& u,
                                     const VectorField& grad_u, int edge_order = kDefaultEdgeOrder) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.size()));
  for (Index v = 0; v < mesh.num_vertices(); ++v) {
    if (map.constrained[v]) g[static_cast<Eigen::Index>(v)] = u(mesh.vertex(v));
  }
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    const Edge& edge = mesh.edge(e);
    if (!edge.on_boundary()) continue;
    const Vector normal = edge.normal;
    g[static_cast<Eigen::Index>(map.num_vertices + e)] =
        integrate_edge(mesh.vertex(edge.vertices[0]), mesh.vertex(edge.vertices[1]),
                       [&](const Point& x) { return grad_u(x).dot(normal); }, edge_order);
  }
  return g;
}

/// Per-polygon integrals of the source at one quadrature degree: the moments
/// int_P f m_i against the scaled monomials of the projector frame, ||f||^2
/// and ||f - Pi_2 f||^2. f is evaluated once per quadrature point.
struct SourceIntegrals {
  std::vector<Coefficients> moments;
  std::vector<double> norm2;
  std::vector<double> residual2;
};

inline SourceIntegrals integrate_source(const Mesh& mesh, const std::vector<Element>& elements, const ScalarField& f,
                                        int degree = kDefaultPolygonDegree) {
  const std::size_t np = mesh.num_polygons();
  SourceIntegrals s;
  s.moments.assign(np, Coefficients::Zero());
  s.norm2.assign(np, 0.0);
  s.residual2.assign(np, 0.0);
  if (!f) return s;
  parallel_for(np, [&](std::size_t p) {
    const Element& el = elements[p];
    const QuadraturePoints qp = polygon_quadrature(el.geometry.vertices, el.geometry.center, degree);
    const MonomialFrame& frame = el.projector.frame;
    std::vector<double> fvals(qp.points.size());
    std::vector<Coefficients> mono(qp.points.size());
    Eigen::Matrix<double, 6, 6> mass = Eigen::Matrix<double, 6, 6>::Zero();
    Coefficients moments = Coefficients::Zero();
    double norm2 = 0.0;
    for (std::size_t q = 0; q < qp.points.size(); ++q) {
      fvals[q] = f(qp.points[q]);
      mono[q] = scaled_monomials(frame, qp.points[q]);
      mass.noalias() += qp.weights[q] * mono[q] * mono[q].transpose();
      moments += qp.weights[q] * fvals[q] * mono[q];
      norm2 += qp.weights[q] * fvals[q] * fvals[q];
    }
    Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(mass);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) {
      throw GeometryError("integrate_source: singular mass matrix (degenerate polygon)");
    }
    const Coefficients proj = ldlt.solve(moments);
    double residual2 = 0.0;
    for (std::size_t q = 0; q < qp.points.size(); ++q) {
      const double r = fvals[q] - mono[q].dot(proj);
      residual2 += qp.weights[q] * r * r;
    }
    s.moments[p] = moments;
    s.norm2[p] = norm2;
    s.residual2[p] = residual2;
  });
  return s;
}

/// Right-hand side F(G psi_j) = int_P f G psi_j dx from precomputed moments.
inline Eigen::VectorXd load_vector(const Mesh& mesh, const DofMap& map, const std::vector<Element>& elements,
                                   const SourceIntegrals& source) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(map.size()));
  for (Index p = 0; p < mesh.num_polygons(); ++p) {
    const Eigen::VectorXd local = elements[p].projector.coefficient_map.transpose() * source.moments[p];
    const auto& g = map.global[p];
    for (std::size_t j = 0; j < g.size(); ++j) {
      b[static_cast<Eigen::Index>(g[j])] += map.sign[p][j] * local[static_cast<Eigen::Index>(j)];
    }
  }
  return b;
}

inline Eigen::VectorXd load_vector(const Mesh& mesh, const DofMap& map, const std::vector<Element>& elements,
                                   const ScalarField& f, int degree = kDefaultPolygonDegree) {
  return load_vector(mesh, map, elements, integrate_source(mesh, elements, f, degree));
}

enum class SolverKind { Automatic, Direct, ConjugateGradient };

struct SolveOptions {
  SolverKind kind = SolverKind::Automatic;
  double tolerance = 1e-10;
  std::size_t direct_limit = 50000;
};

/// The system restricted to free dofs, with the boundary values moved to the
/// right-hand side.
struct LinearSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  Eigen::VectorXd boundary_values;  // full length, prescribed on constrained dofs
  std::vector<Index> free_dofs;
};

inline LinearSystem constrain(const SparseMatrix& A, const Eigen::VectorXd& b, const Eigen::VectorXd& g,
                              const DofMap& map) {
  LinearSystem sys;
  sys.boundary_values = g;
  std::vector<Eigen::Index> reduced(map.size(), -1);
  for (Index i = 0; i < map.size(); ++i) {
    if (!map.constrained[i]) {
      reduced[i] = static_cast<Eigen::Index>(sys.free_dofs.size());
      sys.free_dofs.push_back(i);
    }
  }
  const auto nf = static_cast<Eigen::Index>(sys.free_dofs.size());
  sys.rhs = Eigen::VectorXd::Zero(nf);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(A.nonZeros()));
  for (Eigen::Index col = 0; col < A.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(A, col); it; ++it) {
      const Eigen::Index r = reduced[static_cast<std::size_t>(it.row())];
      const Eigen::Index c = reduced[static_cast<std::size_t>(it.col())];
      if (r < 0) continue;
      if (c >= 0) {
        triplets.emplace_back(r, c, it.value());
      } else {
        sys.rhs[r] -= it.value() * g[it.col()];
      }
    }
  }
  for (Eigen::Index i = 0; i < nf; ++i) sys.rhs[i] += b[static_cast<Eigen::Index>(sys.free_dofs[static_cast<std::size_t>(i)])];
  sys.matrix.resize(nf, nf);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

/// Solves the constrained system; returns the full dof vector. The matrix is
/// first scaled symmetrically to unit diagonal; the residual test applies to
/// the scaled system.
inline Eigen::VectorXd solve(const LinearSystem& sys, const SolveOptions& options = {}) {
  Eigen::VectorXd full = sys.boundary_values;
  const Eigen::Index n = sys.matrix.rows();
  if (n == 0) return full;
  SolverKind kind = options.kind;
  if (kind == SolverKind::Automatic) {
    kind = static_cast<std::size_t>(n) <= options.direct_limit ? SolverKind::Direct : SolverKind::ConjugateGradient;
  }

  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = sys.matrix.coeff(i, i);
    if (!(d > 0.0)) throw SolverError("solve: non-positive diagonal entry, matrix is not positive definite");
    scale[i] = 1.0 / std::sqrt(d);
  }
  const SparseMatrix A = scale.asDiagonal() * sys.matrix * scale.asDiagonal();
  const Eigen::VectorXd b = scale.cwiseProduct(sys.rhs);
  const double bnorm = b.norm();

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  if (bnorm > 0.0 && kind == SolverKind::Direct) {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw SolverError("solve: sparse LDLT factorisation failed");
    if (ldlt.vectorD().minCoeff() <= 0.0) throw SolverError("solve: system matrix is not positive definite");
    y = ldlt.solve(b);
    for (int step = 0; step < 3; ++step) {
      const Eigen::VectorXd r = b - A * y;
      if (r.norm() <= options.tolerance * bnorm) break;
      y += ldlt.solve(r);
    }
  } else if (bnorm > 0.0) {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
    cg.setTolerance(options.tolerance);
    cg.setMaxIterations(20 * n);
    cg.compute(A);
    y = cg.solve(b);
    if (cg.info() != Eigen::Success) {
      throw SolverError("solve: conjugate gradients did not converge within " + std::to_string(20 * n) +
                        " iterations (matrix indefinite?)");
    }
  }
  if (bnorm > 0.0) {
    const double rel = (b - A * y).norm() / bnorm;
    if (!(rel <= 10.0 * options.tolerance)) {
      std::ostringstream msg;
      msg << "solve: relative residual " << rel << " above tolerance " << options.tolerance;
      throw SolverError(msg.str());
    }
  }
  const Eigen::VectorXd x = scale.cwiseProduct(y);
  for (std::size_t i = 0; i < sys.free_dofs.size(); ++i) {
    full[static_cast<Eigen::Index>(sys.free_dofs[i])] = x[static_cast<Eigen::Index>(i)];
  }
  return full;
}

/// Global dofs together with the per-polygon projections G u_h.
struct DiscreteSolution {
  Eigen::VectorXd dofs;
  std::vector<LocalDofs> local_dofs;
  std::vector<Quadratic> projections;
};

inline DiscreteSolution make_solution(const Mesh& mesh, const DofMap& map, const std::vector<Element>& elements,
                                      Eigen::VectorXd dofs) {
  DiscreteSolution sol;
  sol.dofs = std::move(dofs);
  sol.local_dofs.resize(mesh.num_polygons());
  sol.projections.resize(mesh.num_polygons());
  for (Index p = 0; p < mesh.num_polygons(); ++p) {
    sol.local_dofs[p] = map.local(p, sol.dofs);
    sol.projections[p] = elements[p].projector.apply(sol.local_dofs[p]);
  }
  return sol;
}

/// Problem data for one discrete solve.
struct ProblemData {
  ScalarField source;          // f; empty means f = 0
  ScalarField boundary_value;  // u on the boundary; empty means homogeneous
  VectorField boundary_gradient;
};

struct Discretization {
  DofMap dof_map;
  std::vector<Element> elements;
  SparseMatrix stiffness;
  SourceIntegrals source;
  Eigen::VectorXd load;
  DiscreteSolution solution;
};

/// Build, assemble and solve on one mesh.
inline Discretization solve_problem(const Mesh& mesh, const ProblemData& data, const SolveOptions& options = {},
                                    int quad_degree = kDefaultPolygonDegree) {
  Discretization d;
  d.dof_map = build_dof_map(mesh);
  d.elements = build_elements(mesh);
  d.stiffness = assemble(mesh, d.dof_map, d.elements);
  d.source = integrate_source(mesh, d.elements, data.source, quad_degree);
  d.load = load_vector(mesh, d.dof_map, d.elements, d.source);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.dof_map.size()));
  if (data.boundary_value) g = boundary_data(mesh, d.dof_map, data.boundary_value, data.boundary_gradient);
  const LinearSystem sys = constrain(d.stiffness, d.load, g, d.dof_map);
  d.solution = make_solution(mesh, d.dof_map, d.elements, solve(sys, options));
  return d;
}

/// "ndof" then one "id value" line per global dof.
inline void write_solution(std::ostream& out, const DiscreteSolution& sol) {
  const auto old = out.precision(17);
  out << sol.dofs.size() << '\n';
  for (Eigen::Index i = 0; i < sol.dofs.size(); ++i) out << i << ' ' << sol.dofs[i] << '\n';
  out.precision(old);
}

/// "np" then six scaled-monomial coefficients of G u_h per polygon (frame:
/// polygon centroid and diameter).
inline void write_projections(std::ostream& out, const DiscreteSolution& sol) {
  const auto old = out.precision(17);
  out << sol.projections.size() << '\n';
  for (const Quadratic& q : sol.projections) {
    for (Eigen::Index i = 0; i < 6; ++i) out << (i ? " " : "") << q.c[i];
    out << '\n';
  }
  out.precision(old);
}

}  // namespace polyvem
