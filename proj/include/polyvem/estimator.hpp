#pragma once

#include <cmath>
#include <ostream>
#include <vector>

#include "polyvem/element.hpp"
#include "polyvem/mesh.hpp"
#include "polyvem/parallel.hpp"
#include "polyvem/quadrature.hpp"
#include "polyvem/system.hpp"

namespace polyvem {

/// Squared local estimator contributions per polygon.
struct EstimatorField {
  std::vector<double> diameter;
  std::vector<double> eta2;    // h_P^4 ||f||^2
  std::vector<double> zeta2;   // S^P((1-G)u_h, (1-G)u_h)
  std::vector<double> xi2_fn;  // sum_E h_E^-3 ||[G u_h]_E||^2
  std::vector<double> xi2_nd;  // sum_E h_E^-1 ||[(G u_h)_n]_E||^2
  std::vector<double> mu2;
  std::vector<double> osc2;    // ||h_P^2 (1 - Pi_2) f||^2

  std::size_t size() const { return mu2.size(); }

  void resize(std::size_t n) {
    for (auto* v : {&diameter, &eta2, &zeta2, &xi2_fn, &xi2_nd, &mu2, &osc2}) v->assign(n, 0.0);
  }
};

/// Global sums of the squared components.
struct EstimatorTotals {
  double eta2 = 0.0;
  double zeta2 = 0.0;
  double xi2_fn = 0.0;
  double xi2_nd = 0.0;
  double mu2 = 0.0;
  double osc2 = 0.0;
};

/// Hm mu^2 = sum_P h_P^{2 sigma (2 - m)} mu_P^2 for m = 1, 2.
struct WeightedTotals {
  double sigma = 1.0;
  double h1mu2 = 0.0;
  double h2mu2 = 0.0;
};

struct Estimate {
  EstimatorField field;
  EstimatorTotals totals;
  WeightedTotals weighted;
};

struct EstimatorOptions {
  int quad_degree = kDefaultPolygonDegree;
  int edge_order = kDefaultEdgeOrder;
};

inline std::vector<double> weighted_indicators(const EstimatorField& field, double sigma, int m) {
  std::vector<double> w(field.size());
  const double power = 2.0 * sigma * (2.0 - m);
  for (std::size_t p = 0; p < w.size(); ++p) w[p] = std::pow(field.diameter[p], power) * field.mu2[p];
  return w;
}

/// Per-polygon data oscillation osc_2(f, P)^2.
inline std::vector<double> oscillation(const Mesh& mesh, const std::vector<Element>& elements, const ScalarField& f,
                                       int degree = kDefaultPolygonDegree) {
  const SourceIntegrals s = integrate_source(mesh, elements, f, degree);
  std::vector<double> osc(mesh.num_polygons());
  for (Index p = 0; p < osc.size(); ++p) {
    const double h = mesh.polygon(p).diameter;
    osc[p] = h * h * h * h * s.residual2[p];
  }
  return osc;
}

/// Residual estimator. On boundary edges the jumps are G u_h - u and
/// (G u_h - u)_n with the exact trace u (zero for homogeneous data). Every
/// interior edge contributes to both adjacent polygons.
inline Estimate estimate(const Mesh& mesh, const std::vector<Element>& elements, const DiscreteSolution& sol,
                         const SourceIntegrals& source, const ScalarField& u_boundary,
                         const VectorField& grad_boundary, double sigma, const EstimatorOptions& options = {}) {
  const std::size_t np = mesh.num_polygons();
  Estimate est;
  EstimatorField& field = est.field;
  field.resize(np);

  parallel_for(np, [&](std::size_t p) {
    const Polygon& poly = mesh.polygon(p);
    const double h = poly.diameter;
    field.diameter[p] = h;
    const LocalDofs& d = sol.local_dofs[p];
    const LocalDofs r = d - elements[p].projector.dof_map * d;
    field.zeta2[p] = r.squaredNorm() / (h * h);
    const double h4 = h * h * h * h;
    field.eta2[p] = h4 * source.norm2[p];
    field.osc2[p] = h4 * source.residual2[p];
  });

  std::vector<double> edge_fn(mesh.num_edges(), 0.0);
  std::vector<double> edge_nd(mesh.num_edges(), 0.0);
  parallel_for(mesh.num_edges(), [&](std::size_t e) {
    const Edge& edge = mesh.edge(e);
    const Point& a = mesh.vertex(edge.vertices[0]);
    const Point& b = mesh.vertex(edge.vertices[1]);
    const Vector normal = edge.normal;
    const double hE = edge.length;
    double fn = 0.0;
    double nd = 0.0;
    if (edge.on_boundary()) {
      const Quadratic& g = sol.projections[edge.polygons[0]];
      fn = integrate_edge(a, b, [&](const Point& x) {
        const double j = g.value(x) - (u_boundary ? u_boundary(x) : 0.0);
        return j * j;
      }, options.edge_order);
      nd = integrate_edge(a, b, [&](const Point& x) {
        const Vector gu = grad_boundary ? grad_boundary(x) : Vector::Zero();
        const double j = (g.gradient(x) - gu).dot(normal);
        return j * j;
      }, options.edge_order);
    } else {
      // P+ traverses the edge as stored, so its outward normal equals n_E.
      Index plus = edge.polygons[0];
      Index minus = edge.polygons[1];
      const Polygon& p0 = mesh.polygon(plus);
      for (std::size_t k = 0; k < p0.size(); ++k) {
        if (p0.edges[k] == e && mesh.edge_sign(plus, k) < 0.0) std::swap(plus, minus);
      }
      const Quadratic& gp = sol.projections[plus];
      const Quadratic& gm = sol.projections[minus];
      fn = integrate_edge(a, b, [&](const Point& x) {
        const double j = gp.value(x) - gm.value(x);
        return j * j;
      }, options.edge_order);
      nd = integrate_edge(a, b, [&](const Point& x) {
        const double j = (gp.gradient(x) - gm.gradient(x)).dot(normal);
        return j * j;
      }, options.edge_order);
    }
    edge_fn[e] = fn / (hE * hE * hE);
    edge_nd[e] = nd / hE;
  });

  for (Index p = 0; p < np; ++p) {
    for (Index e : mesh.polygon(p).edges) {
      field.xi2_fn[p] += edge_fn[e];
      field.xi2_nd[p] += edge_nd[e];
    }
    field.mu2[p] = field.eta2[p] + field.zeta2[p] + field.xi2_fn[p] + field.xi2_nd[p];
  }

  EstimatorTotals& t = est.totals;
  for (Index p = 0; p < np; ++p) {
    t.eta2 += field.eta2[p];
    t.zeta2 += field.zeta2[p];
    t.xi2_fn += field.xi2_fn[p];
    t.xi2_nd += field.xi2_nd[p];
    t.mu2 += field.mu2[p];
    t.osc2 += field.osc2[p];
  }
  est.weighted.sigma = sigma;
  for (double w : weighted_indicators(field, sigma, 1)) est.weighted.h1mu2 += w;
  for (double w : weighted_indicators(field, sigma, 2)) est.weighted.h2mu2 += w;
  return est;
}

inline Estimate estimate(const Mesh& mesh, const std::vector<Element>& elements, const DiscreteSolution& sol,
                         const ScalarField& f, const ScalarField& u_boundary, const VectorField& grad_boundary,
                         double sigma, const EstimatorOptions& options = {}) {
  return estimate(mesh, elements, sol, integrate_source(mesh, elements, f, options.quad_degree), u_boundary,
                  grad_boundary, sigma, options);
}

/// CSV: polygon_id,h_P,eta2,zeta2,xi2_fn,xi2_nd,mu2,osc2
inline void write_estimator_csv(std::ostream& out, const EstimatorField& field) {
  const auto old = out.precision(17);
  out << "polygon_id,h_P,eta2,zeta2,xi2_fn,xi2_nd,mu2,osc2\n";
  for (std::size_t p = 0; p < field.size(); ++p) {
    out << p << ',' << field.diameter[p] << ',' << field.eta2[p] << ',' << field.zeta2[p] << ','
        << field.xi2_fn[p] << ',' << field.xi2_nd[p] << ',' << field.mu2[p] << ',' << field.osc2[p] << '\n';
  }
  out.precision(old);
}

}  // namespace polyvem
