#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "polyvem/geometry.hpp"

namespace polyvem {

struct MeshError : Error {
  using Error::Error;
};

/// A mesh edge. The global unit normal is the tangent (vertices[0] -> vertices[1])
/// rotated by -90 degrees. Interior edges store the lower vertex id first;
/// boundary edges are stored in the traversal direction of their polygon so
/// that the global normal is the outward normal of the domain.
struct Edge {
  std::array<Index, 2> vertices{npos, npos};
  std::array<Index, 2> polygons{npos, npos};
  Vector tangent = Vector::Zero();
  Vector normal = Vector::Zero();
  double length = 0.0;

  bool on_boundary() const { return polygons[1] == npos; }
};

struct Polygon {
  std::vector<Index> vertices;  // counterclockwise
  std::vector<Index> edges;     // edges[k] joins vertices[k] and vertices[k+1]
  std::vector<char> hanging;    // vertex was inserted by refinement of a neighbour
  Point star_center = Point::Zero();
  double area = 0.0;
  double diameter = 0.0;

  std::size_t size() const { return vertices.size(); }
};

struct SubTriangulation {
  Index parent = npos;
  std::vector<std::array<Point, 3>> triangles;
};

struct MeshOptions {
  /// Absolute tolerance of the geometric predicates on unit-scaled coordinates.
  double tolerance = 1e-12;
};

struct MeshDiagnostics {
  double min_edge_ratio = 0.0;      // min h_E / h_P, the mesh-regularity estimate
  double min_angle_degrees = 0.0;   // smallest angle of all star sub-triangles
  std::size_t hanging_vertices = 0;
};

class Mesh;
Mesh build_mesh(std::vector<Point> vertices, std::vector<std::vector<Index>> cycles,
                std::vector<std::vector<char>> hanging = {}, const MeshOptions& options = {});

/// Immutable polygonal mesh. Built through build_mesh, read_mesh or refine.
class Mesh {
 public:
  Mesh() = default;

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Polygon>& polygons() const { return polygons_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_polygons() const { return polygons_.size(); }

  const Point& vertex(Index v) const { return vertices_[v]; }
  const Edge& edge(Index e) const { return edges_[e]; }
  const Polygon& polygon(Index p) const { return polygons_[p]; }

  bool is_boundary_vertex(Index v) const { return boundary_vertex_[v] != 0; }

  Point edge_midpoint(Index e) const {
    return 0.5 * (vertices_[edges_[e].vertices[0]] + vertices_[edges_[e].vertices[1]]);
  }

  std::vector<Point> polygon_points(Index p) const {
    std::vector<Point> pts;
    pts.reserve(polygons_[p].size());
    for (Index v : polygons_[p].vertices) pts.push_back(vertices_[v]);
    return pts;
  }

  /// +1 if the outward normal of polygon p on its k-th edge equals the global
  /// edge normal, -1 otherwise.
  double edge_sign(Index p, std::size_t k) const {
    const Polygon& poly = polygons_[p];
    return edges_[poly.edges[k]].vertices[0] == poly.vertices[k] ? 1.0 : -1.0;
  }

  /// The neighbour of p across its k-th edge, or npos on the boundary.
  Index neighbour(Index p, std::size_t k) const {
    const Edge& e = edges_[polygons_[p].edges[k]];
    return e.polygons[0] == p ? e.polygons[1] : e.polygons[0];
  }

  double total_area() const {
    double a = 0.0;
    for (const auto& p : polygons_) a += p.area;
    return a;
  }

  double max_diameter() const {
    double h = 0.0;
    for (const auto& p : polygons_) h = std::max(h, p.diameter);
    return h;
  }

  const MeshDiagnostics& diagnostics() const { return diagnostics_; }

  /// Reverses the stored orientation (and hence the global normal) of one edge.
  void flip_edge(Index e) {
    Edge& edge = edges_.at(e);
    std::swap(edge.vertices[0], edge.vertices[1]);
    edge.tangent = -edge.tangent;
    edge.normal = -edge.normal;
  }

 private:
  friend Mesh build_mesh(std::vector<Point>, std::vector<std::vector<Index>>,
                         std::vector<std::vector<char>>, const MeshOptions&);

  std::vector<Point> vertices_;
  std::vector<Edge> edges_;
  std::vector<Polygon> polygons_;
  std::vector<char> boundary_vertex_;
  MeshDiagnostics diagnostics_;
};

namespace detail {

inline double min_triangle_angle(const Point& a, const Point& b, const Point& c) {
  auto angle = [](const Point& p, const Point& q, const Point& r) {
    const Vector u = q - p;
    const Vector w = r - p;
    return std::atan2(std::abs(cross(u, w)), u.dot(w));
  };
  return std::min({angle(a, b, c), angle(b, c, a), angle(c, a, b)});
}

// Detects vertices lying strictly inside a single-sided edge: such a T-junction
// means two cells share a partial edge, which violates admissibility.
inline void check_conformity(const std::vector<Point>& vertices, const std::vector<Edge>& edges,
                             double tol) {
  std::vector<Index> order(vertices.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return vertices[a].x() < vertices[b].x(); });
  std::vector<double> xs(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) xs[i] = vertices[order[i]].x();

  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    if (!edge.on_boundary()) continue;
    const Point& a = vertices[edge.vertices[0]];
    const Point& b = vertices[edge.vertices[1]];
    const double lo = std::min(a.x(), b.x()) - tol;
    const double hi = std::max(a.x(), b.x()) + tol;
    auto first = std::lower_bound(xs.begin(), xs.end(), lo);
    for (auto it = first; it != xs.end() && *it <= hi; ++it) {
      const Index v = order[static_cast<std::size_t>(it - xs.begin())];
      if (v == edge.vertices[0] || v == edge.vertices[1]) continue;
      const Point& p = vertices[v];
      const double s = (p - a).dot(b - a) / (edge.length * edge.length);
      if (s <= tol || s >= 1.0 - tol) continue;
      if (std::abs(cross(b - a, p - a)) / edge.length <= tol * std::max(1.0, edge.length)) {
        std::ostringstream msg;
        msg << "build_mesh: vertex " << v << " lies inside edge " << e
            << " without being a vertex of the adjacent polygon (non-admissible)";
        throw MeshError(msg.str());
      }
    }
  }
}

}  // namespace detail

/// Builds and validates a mesh from vertex coordinates and counterclockwise
/// vertex cycles. The star center of every polygon is its centroid.
inline Mesh build_mesh(std::vector<Point> vertices, std::vector<std::vector<Index>> cycles,
                       std::vector<std::vector<char>> hanging, const MeshOptions& options) {
  const double tol = options.tolerance;
  Mesh mesh;
  mesh.vertices_ = std::move(vertices);
  const std::size_t nv = mesh.vertices_.size();

  for (const Point& p : mesh.vertices_) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) {
      throw MeshError("build_mesh: non-finite vertex coordinate");
    }
  }
  if (!hanging.empty() && hanging.size() != cycles.size()) {
    throw MeshError("build_mesh: hanging flags do not match the polygon count");
  }

  std::map<std::vector<Index>, Index> seen;
  std::map<std::pair<Index, Index>, Index> edge_of;
  mesh.polygons_.resize(cycles.size());

  MeshDiagnostics diag;
  diag.min_edge_ratio = std::numeric_limits<double>::infinity();
  diag.min_angle_degrees = 180.0;

  for (std::size_t p = 0; p < cycles.size(); ++p) {
    auto& cycle = cycles[p];
    const std::size_t n = cycle.size();
    if (n < 3) throw MeshError("build_mesh: polygon " + std::to_string(p) + " has fewer than 3 vertices");
    for (Index v : cycle) {
      if (v >= nv) throw MeshError("build_mesh: polygon " + std::to_string(p) + " references an unknown vertex");
    }
    {
      std::vector<Index> key = cycle;
      std::sort(key.begin(), key.end());
      if (std::adjacent_find(key.begin(), key.end()) != key.end()) {
        throw MeshError("build_mesh: polygon " + std::to_string(p) + " repeats a vertex");
      }
      auto [it, fresh] = seen.emplace(std::move(key), p);
      if (!fresh) {
        throw MeshError("build_mesh: duplicate polygon " + std::to_string(p) + " (same as " +
                        std::to_string(it->second) + ")");
      }
    }

    Polygon& poly = mesh.polygons_[p];
    poly.vertices = std::move(cycle);
    poly.hanging = hanging.empty() ? std::vector<char>(n, 0) : std::move(hanging[p]);
    if (poly.hanging.size() != n) throw MeshError("build_mesh: hanging flags have the wrong length");

    const std::vector<Point> pts = mesh.polygon_points(p);
    poly.area = signed_area(pts);
    poly.diameter = polygon_diameter(pts);
    if (!(poly.area > tol * std::max(1.0, poly.diameter * poly.diameter))) {
      throw MeshError("build_mesh: polygon " + std::to_string(p) + " is not counterclockwise (signed area " +
                      std::to_string(poly.area) + ")");
    }
    poly.star_center = polygon_centroid(pts);
    for (std::size_t k = 0; k < n; ++k) {
      const Point& a = pts[k];
      const Point& b = pts[(k + 1) % n];
      const double tri = signed_area(poly.star_center, a, b);
      if (!(tri > tol * poly.diameter * poly.diameter)) {
        throw MeshError("build_mesh: polygon " + std::to_string(p) +
                        " is not star-shaped with respect to its centroid");
      }
      diag.min_angle_degrees = std::min(
          diag.min_angle_degrees, detail::min_triangle_angle(poly.star_center, a, b) * 180.0 / std::numbers::pi);
    }

    poly.edges.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const Index a = poly.vertices[k];
      const Index b = poly.vertices[(k + 1) % n];
      const auto key = std::minmax(a, b);
      auto [it, fresh] = edge_of.emplace(std::pair<Index, Index>{key.first, key.second}, mesh.edges_.size());
      if (fresh) {
        Edge e;
        e.vertices = {a, b};
        e.polygons = {p, npos};
        mesh.edges_.push_back(e);
      } else {
        Edge& e = mesh.edges_[it->second];
        if (e.polygons[1] != npos) {
          throw MeshError("build_mesh: non-manifold edge (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") shared by more than two polygons");
        }
        if (e.vertices[0] != b) {
          throw MeshError("build_mesh: polygons " + std::to_string(e.polygons[0]) + " and " + std::to_string(p) +
                          " traverse a shared edge in the same direction (overlap)");
        }
        e.polygons[1] = p;
      }
      poly.edges[k] = it->second;
    }
  }

  mesh.boundary_vertex_.assign(nv, 0);
  for (Edge& e : mesh.edges_) {
    if (!e.on_boundary() && e.vertices[0] > e.vertices[1]) std::swap(e.vertices[0], e.vertices[1]);
    const Vector d = mesh.vertices_[e.vertices[1]] - mesh.vertices_[e.vertices[0]];
    e.length = d.norm();
    if (!(e.length > tol)) throw MeshError("build_mesh: zero-length edge");
    e.tangent = d / e.length;
    e.normal = right_normal(e.tangent);
    if (e.on_boundary()) {
      mesh.boundary_vertex_[e.vertices[0]] = 1;
      mesh.boundary_vertex_[e.vertices[1]] = 1;
    }
  }
  for (const Polygon& poly : mesh.polygons_) {
    for (Index e : poly.edges) {
      diag.min_edge_ratio = std::min(diag.min_edge_ratio, mesh.edges_[e].length / poly.diameter);
    }
    diag.hanging_vertices += static_cast<std::size_t>(std::count(poly.hanging.begin(), poly.hanging.end(), 1));
  }
  mesh.diagnostics_ = diag;

  detail::check_conformity(mesh.vertices_, mesh.edges_, tol);
  return mesh;
}

/// Star-center sub-triangulation (star_center, z_j, z_{j+1}) of one polygon.
inline SubTriangulation subtriangulate(const Mesh& mesh, Index p) {
  const Polygon& poly = mesh.polygon(p);
  SubTriangulation sub;
  sub.parent = p;
  const std::size_t n = poly.size();
  sub.triangles.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point& a = mesh.vertex(poly.vertices[k]);
    const Point& b = mesh.vertex(poly.vertices[(k + 1) % n]);
    if (!(signed_area(poly.star_center, a, b) > 0.0)) {
      throw GeometryError("subtriangulate: non-positive sub-triangle area in polygon " + std::to_string(p));
    }
    sub.triangles.push_back({poly.star_center, a, b});
  }
  return sub;
}

/// Closure of a marked set: adds every unmarked neighbour whose side would
/// otherwise receive a second hanging node. Returns a 0/1 flag per polygon.
inline std::vector<char> refinement_closure(const Mesh& mesh, std::span<const Index> marked) {
  std::vector<char> flag(mesh.num_polygons(), 0);
  std::vector<Index> work;
  for (Index p : marked) {
    if (p >= mesh.num_polygons()) throw MeshError("refine: marked polygon id out of range");
    if (!flag[p]) {
      flag[p] = 1;
      work.push_back(p);
    }
  }
  // Every polygon enters the work list at most once, so the loop is bounded by
  // the polygon count; anything beyond that means corrupt adjacency.
  std::size_t processed = 0;
  while (!work.empty()) {
    if (++processed > mesh.num_polygons()) throw MeshError("refine: closure did not terminate");
    const Index p = work.back();
    work.pop_back();
    const Polygon& poly = mesh.polygon(p);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Index q = mesh.neighbour(p, k);
      if (q == npos || flag[q]) continue;
      const Polygon& other = mesh.polygon(q);
      const Edge& e = mesh.edge(poly.edges[k]);
      bool ends_hanging = false;
      for (std::size_t j = 0; j < other.size(); ++j) {
        if (other.hanging[j] && (other.vertices[j] == e.vertices[0] || other.vertices[j] == e.vertices[1])) {
          ends_hanging = true;
        }
      }
      if (ends_hanging) {
        flag[q] = 1;
        work.push_back(q);
      }
    }
  }
  return flag;
}

/// Midpoint-to-centroid refinement of the marked polygons with hanging-node
/// closure. A marked polygon with N cycle vertices becomes N quadrilaterals
/// (z_j, mid E(j), centroid, mid E(j-1)).
inline Mesh refine(const Mesh& mesh, std::span<const Index> marked, const MeshOptions& options = {}) {
  const std::vector<char> flag = refinement_closure(mesh, marked);
  if (std::none_of(flag.begin(), flag.end(), [](char c) { return c != 0; })) return mesh;

  std::vector<Point> vertices = mesh.vertices();
  std::vector<Index> midpoint(mesh.num_edges(), npos);
  for (Index p = 0; p < mesh.num_polygons(); ++p) {
    if (!flag[p]) continue;
    for (Index e : mesh.polygon(p).edges) midpoint[e] = 1;
  }
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    if (midpoint[e] == npos) continue;
    midpoint[e] = vertices.size();
    vertices.push_back(mesh.edge_midpoint(e));
  }

  std::vector<std::vector<Index>> cycles;
  std::vector<std::vector<char>> hanging;
  cycles.reserve(mesh.num_polygons() * 2);
  for (Index p = 0; p < mesh.num_polygons(); ++p) {
    const Polygon& poly = mesh.polygon(p);
    const std::size_t n = poly.size();
    if (flag[p]) {
      const Index center = vertices.size();
      vertices.push_back(poly.star_center);
      for (std::size_t j = 0; j < n; ++j) {
        const Index prev = midpoint[poly.edges[(j + n - 1) % n]];
        const Index next = midpoint[poly.edges[j]];
        cycles.push_back({poly.vertices[j], next, center, prev});
        hanging.emplace_back(4, 0);
      }
    } else {
      std::vector<Index> cycle;
      std::vector<char> hang;
      for (std::size_t j = 0; j < n; ++j) {
        cycle.push_back(poly.vertices[j]);
        hang.push_back(poly.hanging[j]);
        const Index m = midpoint[poly.edges[j]];
        if (m != npos) {
          cycle.push_back(m);
          hang.push_back(1);
        }
      }
      cycles.push_back(std::move(cycle));
      hanging.push_back(std::move(hang));
    }
  }
  return build_mesh(std::move(vertices), std::move(cycles), std::move(hanging), options);
}

inline Mesh uniform_refine(const Mesh& mesh, const MeshOptions& options = {}) {
  std::vector<Index> all(mesh.num_polygons());
  std::iota(all.begin(), all.end(), Index{0});
  return refine(mesh, all, options);
}

/// Number of hanging-node violations: consecutive inserted vertices on one side
/// (two hanging nodes on a pre-split edge) or a flagged vertex that is not
/// geometrically straight.
inline std::size_t count_hanging_violations(const Mesh& mesh, double tol = 1e-10) {
  std::size_t bad = 0;
  for (Index p = 0; p < mesh.num_polygons(); ++p) {
    const Polygon& poly = mesh.polygon(p);
    const std::size_t n = poly.size();
    for (std::size_t j = 0; j < n; ++j) {
      if (!poly.hanging[j]) continue;
      const std::size_t next = (j + 1) % n;
      const std::size_t prev = (j + n - 1) % n;
      if (poly.hanging[next]) ++bad;
      const Point& a = mesh.vertex(poly.vertices[prev]);
      const Point& z = mesh.vertex(poly.vertices[j]);
      const Point& b = mesh.vertex(poly.vertices[next]);
      if (std::abs(cross(z - a, b - z)) > tol * (b - a).squaredNorm() || (z - a).dot(b - z) <= 0.0) ++bad;
    }
  }
  return bad;
}

/// Plain-text mesh format: "nv np", nv lines "x y", np lines "N v_1 ... v_N".
inline Mesh read_mesh(std::istream& in, const MeshOptions& options = {}) {
  std::size_t nv = 0;
  std::size_t np = 0;
  if (!(in >> nv >> np)) throw MeshError("read_mesh: missing header \"nv np\"");
  std::vector<Point> vertices(nv);
  for (auto& v : vertices) {
    if (!(in >> v.x() >> v.y())) throw MeshError("read_mesh: truncated vertex list");
  }
  std::vector<std::vector<Index>> cycles(np);
  for (auto& c : cycles) {
    std::size_t n = 0;
    if (!(in >> n)) throw MeshError("read_mesh: truncated polygon list");
    c.resize(n);
    for (auto& v : c) {
      if (!(in >> v)) throw MeshError("read_mesh: truncated polygon cycle");
    }
  }
  return build_mesh(std::move(vertices), std::move(cycles), {}, options);
}

inline void write_mesh(std::ostream& out, const Mesh& mesh) {
  const auto old_precision = out.precision(17);
  out << mesh.num_vertices() << ' ' << mesh.num_polygons() << '\n';
  for (const Point& v : mesh.vertices()) out << v.x() << ' ' << v.y() << '\n';
  for (const Polygon& p : mesh.polygons()) {
    out << p.size();
    for (Index v : p.vertices) out << ' ' << v;
    out << '\n';
  }
  out.precision(old_precision);
}

/// Structured nx-by-ny grid of rectangles covering [x0,x1]x[y0,y1].
inline Mesh rectangle_grid(double x0, double x1, double y0, double y1, std::size_t nx, std::size_t ny) {
  std::vector<Point> vertices;
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      vertices.emplace_back(x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(nx),
                            y0 + (y1 - y0) * static_cast<double>(j) / static_cast<double>(ny));
    }
  }
  auto id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  std::vector<std::vector<Index>> cycles;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      cycles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return build_mesh(std::move(vertices), std::move(cycles));
}

}  // namespace polyvem
