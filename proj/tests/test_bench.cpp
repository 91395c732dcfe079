#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "polyvem/bench.hpp"

using namespace polyvem;

namespace {

constexpr double kStep = 1e-3;

Vector fd_gradient(const ExactSolution& u, const Point& x) {
  const Vector ex(kStep, 0), ey(0, kStep);
  return {(u.value(x + ex) - u.value(x - ex)) / (2 * kStep), (u.value(x + ey) - u.value(x - ey)) / (2 * kStep)};
}

Eigen::Matrix2d fd_hessian(const ExactSolution& u, const Point& x) {
  const Vector ex(kStep, 0), ey(0, kStep);
  Eigen::Matrix2d h;
  h.col(0) = (u.gradient(x + ex) - u.gradient(x - ex)) / (2 * kStep);
  h.col(1) = (u.gradient(x + ey) - u.gradient(x - ey)) / (2 * kStep);
  return h;
}

double fd_bilaplacian(const ExactSolution& u, const Point& x) {
  auto lap = [&](const Point& y) { return u.hessian(y).trace(); };
  const Vector ex(kStep, 0), ey(0, kStep);
  return (lap(x + ex) + lap(x - ex) + lap(x + ey) + lap(x - ey) - 4.0 * lap(x)) / (kStep * kStep);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// random points of the domain at distance >= margin from the origin and from the boundary
std::vector<Point> sample(const std::string& domain, std::mt19937& rng, double margin) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  std::vector<Point> pts;
  while (pts.size() < 10) {
    Point x(c(rng), c(rng));
    if (domain == "unit_square") x = 0.5 * (x + Point(1, 1));
    const double lo = domain == "unit_square" ? 0.0 : -1.0;
    if (std::min({x.x() - lo, x.y() - lo, 1 - x.x(), 1 - x.y()}) < margin) continue;
    if (domain == "lshape" && !(x.x() < -margin || x.y() > margin)) continue;
    if (domain == "zshape") {
      if (x.norm() < 0.2) continue;
      const double t = ad::polar_angle(x.x(), x.y());
      if (t < 0.1 || t > 7.0 * std::numbers::pi / 4.0 - 0.1) continue;
    }
    if (domain != "unit_square" && x.norm() < 0.2) continue;
    pts.push_back(x);
  }
  return pts;
}

void check_derivatives(const ExactSolution& u, unsigned seed) {
  std::mt19937 rng(seed);
  for (const Point& x : sample(u.domain, rng, 0.05)) {
    const Vector g = u.gradient(x);
    const Vector gfd = fd_gradient(u, x);
    EXPECT_LE((g - gfd).norm() / std::max(1.0, g.norm()), 1e-5) << u.domain << " at " << x.transpose();
    const Eigen::Matrix2d h = u.hessian(x);
    // second differences with step 1e-3 carry an O(1e-6 |D^4 u|) truncation error near the corners
    EXPECT_LE((h - fd_hessian(u, x)).norm() / std::max(1.0, h.norm()), 1e-4) << u.domain;
    EXPECT_NEAR(h(0, 1), h(1, 0), 1e-12 * std::max(1.0, h.norm()));
    const double f = u.source ? u.source(x) : 0.0;
    EXPECT_LE(rel(fd_bilaplacian(u, x), f), 1e-4) << u.domain << " f at " << x.transpose();
  }
}

}  // namespace

TEST(LShape, PointValues) {
  const ExactSolution u = lshape_solution();
  EXPECT_EQ(u.value(Point(0, 0)), 0.0);
  EXPECT_EQ(u.gradient(Point(0, 0)).norm(), 0.0);
  EXPECT_NEAR(u.value(Point(0, 1)), 0.5, 1e-15);
  EXPECT_NEAR(u.value(Point(-1, 0)), -std::sqrt(3.0) / 2.0, 1e-15);
  EXPECT_NEAR(u.sigma, 2.0 / 3.0, 1e-16);
  EXPECT_FALSE(u.source);
  // single-valued along the closure of the domain: theta = 3 pi / 2 on the lower edge
  EXPECT_NEAR(u.value(Point(0, -0.5)), std::pow(0.5, 5.0 / 3.0) * std::sin(2.5 * std::numbers::pi), 1e-15);
}

TEST(LShape, PolarChainRule) {
  const ExactSolution u = lshape_solution();
  const Point x(-0.3, 0.6);
  const double r = x.norm();
  const double t = std::atan2(x.y(), x.x());
  const double ur = 5.0 / 3.0 * std::pow(r, 2.0 / 3.0) * std::sin(5.0 * t / 3.0);
  const double ut = 5.0 / 3.0 * std::pow(r, 5.0 / 3.0) * std::cos(5.0 * t / 3.0);
  const Vector g(std::cos(t) * ur - std::sin(t) * ut / r, std::sin(t) * ur + std::cos(t) * ut / r);
  EXPECT_LE((u.gradient(x) - g).norm(), 1e-14);
}

TEST(LShape, DerivativesMatchFiniteDifferences) { check_derivatives(lshape_solution(), 1); }

TEST(SmoothSquare, Values) {
  const ExactSolution u = smooth_square_solution();
  EXPECT_NEAR(u.value(Point(0.5, 0.5)), 1.0, 1e-15);
  for (const Point& b : {Point(0, 0.3), Point(1, 0.7), Point(0.2, 0), Point(0.9, 1)}) {
    EXPECT_NEAR(u.value(b), 0.0, 1e-15);
    EXPECT_NEAR(u.gradient(b).norm(), 0.0, 1e-14);
  }
  const Point q(0.25, 0.25);
  EXPECT_LE(rel(fd_bilaplacian(u, q), u.source(q)), 1e-5);
  // u = (1 - cos 2 pi x)(1 - cos 2 pi y) / 4
  const double pi4 = std::pow(std::numbers::pi, 4);
  const double x = 0.3, y = 0.55;
  const double cx = std::cos(2 * std::numbers::pi * x), cy = std::cos(2 * std::numbers::pi * y);
  EXPECT_NEAR(u.source(Point(x, y)), pi4 * (16 * cx * cy - 4 * cx - 4 * cy), 1e-10);
}

TEST(SmoothSquare, DerivativesMatchFiniteDifferences) { check_derivatives(smooth_square_solution(), 2); }

TEST(Patch, DerivativesMatchFiniteDifferences) { check_derivatives(patch_solution(), 3); }

TEST(ZShape, ProfileTranscription) {
  const AngularProfile g = grisvard_profile();
  EXPECT_FALSE(check_profile(g).has_value());
  const double z = g.exponent;
  const double w = g.omega;
  EXPECT_LE(std::abs(std::sin(z * w) * std::sin(z * w) - z * z * std::sin(w) * std::sin(w)), 1e-12);
  for (double t : {0.0, w}) {
    EXPECT_LE(std::abs(g(t)[0]), 1e-12);
    EXPECT_LE(std::abs(g(t)[1]), 1e-12);
  }
  // derivatives of g agree with finite differences of the lower ones
  for (double t : {0.4, 1.7, 3.9, 5.1}) {
    const auto a = g(t + 1e-5);
    const auto b = g(t - 1e-5);
    const auto c = g(t);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR((a[k] - b[k]) / 2e-5, c[k + 1], 1e-6 * std::max(1.0, std::abs(c[k + 1])));
  }
  // the clamped corner solution r^{1+z} g is biharmonic: (g'''' + 2 (z^2 + 1) g'' + (z^2 - 1)^2 g) = 0
  for (double t : {0.3, 2.0, 4.4}) {
    const auto d = g(t);
    EXPECT_NEAR(d[4] + 2.0 * (z * z + 1.0) * d[2] + (z * z - 1.0) * (z * z - 1.0) * d[0], 0.0, 1e-12);
  }
}

TEST(ZShape, CheckRejectsWrongExponent) {
  AngularProfile g = grisvard_profile();
  g.exponent = 0.5;
  EXPECT_TRUE(check_profile(g).has_value());
  EXPECT_TRUE(check_profile(AngularProfile{}).has_value());
}

TEST(ZShape, StubProfileEvaluation) {
  const AngularProfile stub{kZShapeExponent, kZShapeAngle,
                            [](double, double, double) { return std::array<double, 5>{1, 0, 0, 0, 0}; }};
  const ExactSolution u = zshape_solution(stub);
  EXPECT_NEAR(u.value(Point(0.5, 0.5)), std::pow(0.75, 4) * std::pow(0.5, (1 + kZShapeExponent) / 2), 1e-15);
  EXPECT_EQ(u.value(Point(0, 0)), 0.0);
}

TEST(ZShape, ClampedOnOuterBoundary) {
  const ExactSolution u = make_benchmark("zshape").exact;
  for (const Point& b : {Point(1, 0.4), Point(-1, -0.2), Point(0.3, 1), Point(-0.6, -1)}) {
    EXPECT_NEAR(u.value(b), 0.0, 1e-15);
    EXPECT_NEAR(u.gradient(b).norm(), 0.0, 1e-14);
  }
  // re-entrant sides are clamped by the profile
  for (double r : {0.2, 0.6}) {
    EXPECT_NEAR(u.value(Point(r, 0)), 0.0, 1e-13);
    EXPECT_NEAR(u.value(Point(r, -r)), 0.0, 1e-13);
    EXPECT_NEAR(u.gradient(Point(r, 0)).norm(), 0.0, 1e-12);
  }
  EXPECT_NEAR(u.sigma, kZShapeExponent, 1e-16);
}

TEST(ZShape, DerivativesMatchFiniteDifferences) { check_derivatives(make_benchmark("zshape").exact, 4); }

TEST(ZShape, MissingProfileDisablesBenchmark) { EXPECT_THROW(zshape_solution(AngularProfile{}), Error); }

TEST(ErrorNorms, CubicAgainstZero) {
  const Mesh sq = build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}});
  DiscreteSolution sol;
  sol.projections = {Quadratic{{Point(0.5, 0.5), std::sqrt(2.0)}, Coefficients::Zero()}};
  ExactSolution u;
  u.gradient = [](const Point& x) { return Vector(3 * x.x() * x.x(), 0); };
  u.hessian = [](const Point& x) { return Eigen::Matrix2d{{6 * x.x(), 0}, {0, 0}}; };
  const ErrorReport e = error_norms(sq, sol, u);
  EXPECT_NEAR(e.h2e * e.h2e, 12.0, 1e-13);
  EXPECT_NEAR(e.h1e * e.h1e, 9.0 / 5.0, 1e-13);
}

TEST(ErrorNorms, FrobeniusCountsOffDiagonalTwice) {
  const Mesh sq = build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}});
  DiscreteSolution sol;
  sol.projections = {Quadratic{{Point(0.5, 0.5), 1.0}, Coefficients::Zero()}};
  ExactSolution u;  // u = xy
  u.gradient = [](const Point& x) { return Vector(x.y(), x.x()); };
  u.hessian = [](const Point&) { return Eigen::Matrix2d{{0, 1}, {1, 0}}; };
  EXPECT_NEAR(error_norms(sq, sol, u).h2e, std::sqrt(2.0), 1e-14);
}

TEST(ErrorNorms, LShapeQuadratureSelfConsistency) {
  const Benchmark b = make_benchmark("lshape");
  const Discretization d = solve_problem(b.initial_mesh, problem_data(b.exact));
  const ErrorReport e10 = error_norms(b.initial_mesh, d.solution, b.exact, 10);
  const ErrorReport e20 = error_norms(b.initial_mesh, d.solution, b.exact, 20);
  EXPECT_GT(e10.h2e, 0.0);
  EXPECT_GT(e10.h1e, 0.0);
  // the H2 integrand is singular like r^(-2/3) at the re-entrant corner
  EXPECT_LE(std::abs(e10.h1e - e20.h1e) / e20.h1e, 1e-4);
  EXPECT_LE(std::abs(e10.h2e - e20.h2e) / e20.h2e, 1e-2);
}

TEST(Registry, NamesAndErrors) {
  for (const std::string& name : benchmark_names()) {
    const Benchmark b = make_benchmark(name);
    EXPECT_EQ(b.name, name);
    EXPECT_GT(b.initial_mesh.num_polygons(), 0u);
  }
  EXPECT_THROW(make_benchmark("circle"), Error);
  EXPECT_NEAR(make_benchmark("lshape").initial_mesh.total_area(), 3.0, 1e-15);
  EXPECT_NEAR(make_benchmark("zshape").initial_mesh.total_area(), 3.5, 1e-15);
}
