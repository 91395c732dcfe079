#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "polyvem/adaptive.hpp"
#include "support.hpp"

using namespace polyvem;

TEST(Dorfler, DominantIndicator) {
  const std::vector<double> v{4, 1, 1, 1, 1};
  EXPECT_EQ(dorfler_mark(v, 0.5), std::vector<Index>{0});
}

TEST(Dorfler, TiesPreferLowIds) {
  for (std::size_t n : {1u, 2u, 5u, 8u}) {
    const std::vector<double> v(n, 2.5);
    std::vector<Index> expected((n + 1) / 2);
    std::iota(expected.begin(), expected.end(), Index{0});
    EXPECT_EQ(dorfler_mark(v, 0.5), expected);
  }
}

TEST(Dorfler, BulkThreeQuarters) {
  const std::vector<double> v{5, 3, 2, 1, 1};
  EXPECT_EQ(dorfler_mark(v, 0.75), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(polyvem::testing::minimal_cardinality(v, 0.75), 3u);
}

TEST(Dorfler, MatchesExhaustiveSearch) {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> size(1, 12);
  std::uniform_int_distribution<int> small(0, 6);
  std::uniform_real_distribution<double> real(0.0, 1.0);
  std::uniform_real_distribution<double> bulk(0.05, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    for (auto& x : v) x = trial % 2 ? static_cast<double>(small(rng)) : real(rng);
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
    const double theta = bulk(rng);
    const auto marked = dorfler_mark(v, theta);
    EXPECT_EQ(marked.size(), polyvem::testing::minimal_cardinality(v, theta));
    EXPECT_TRUE(std::is_sorted(marked.begin(), marked.end()));
  }
}

TEST(Dorfler, Errors) {
  const std::vector<double> v{1, 2};
  EXPECT_THROW(dorfler_mark(v, 0.0), Error);
  EXPECT_THROW(dorfler_mark(v, 1.5), Error);
  const std::vector<double> bad{1, -1};
  EXPECT_THROW(dorfler_mark(bad, 0.5), Error);
  const std::vector<double> zero{0, 0, 0};
  EXPECT_TRUE(dorfler_mark(zero, 0.5).empty());
}

TEST(FitRate, RecoversSlope) {
  std::vector<LevelRecord> levels;
  for (std::size_t k = 0; k < 5; ++k) {
    LevelRecord r;
    r.ndof = 10u << (2 * k);
    r.h2e = 3.0 * std::pow(static_cast<double>(r.ndof), -0.4);
    levels.push_back(r);
  }
  EXPECT_NEAR(fit_rate(levels, &LevelRecord::h2e), 0.4, 1e-12);
}

TEST(Run, PatchStopsAfterOneLevel) {
  RunOptions opt;
  opt.max_levels = 5;
  const ConvergenceHistory h = run_adaptive(make_benchmark("patch_p2"), opt);
  ASSERT_EQ(h.levels.size(), 1u);
  EXPECT_LE(h.levels[0].h2mu, 1e-12);
}

TEST(Run, SingleLevelGivesSingleRecord) {
  RunOptions opt;
  opt.max_levels = 1;
  for (const char* name : {"lshape", "smooth_square"}) {
    EXPECT_EQ(run_uniform(make_benchmark(name), opt).levels.size(), 1u);
  }
}

TEST(Run, LShapeUniformCountingOracle) {
  RunOptions opt;
  opt.max_levels = 5;
  std::vector<std::size_t> seen;
  const ConvergenceHistory h = run_uniform(make_benchmark("lshape"), opt, [&](const LevelState& s) {
    EXPECT_EQ(s.record.ndof, s.mesh.num_vertices() + s.mesh.num_edges());
    seen.push_back(s.record.ndof);
  });
  ASSERT_EQ(h.levels.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    // n x n cells per unit square: V = (2n+1)^2 - n^2, F = 3 n^2, E = V + F - 1
    const std::size_t n = std::size_t{1} << k;
    const std::size_t v = (2 * n + 1) * (2 * n + 1) - n * n;
    const std::size_t e = v + 3 * n * n - 1;
    EXPECT_EQ(h.levels[k].ndof, v + e);
    EXPECT_EQ(seen[k], v + e);
  }
  EXPECT_EQ(h.levels[0].ndof, 18u);
  EXPECT_EQ(h.levels[4].ndof, 2433u);
}

TEST(Run, SmoothUniformErrorDecreases) {
  RunOptions opt;
  opt.max_levels = 4;
  Benchmark b = make_benchmark("smooth_square");
  b.initial_mesh = unit_square_mesh(2);
  const ConvergenceHistory h = run_uniform(b, opt);
  ASSERT_EQ(h.levels.size(), 4u);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_LT(h.levels[k].h2e, h.levels[k - 1].h2e);
}

TEST(Run, LShapeUniformRateNearOneThird) {
  RunOptions opt;
  opt.max_levels = 5;
  const ConvergenceHistory h = run_uniform(make_benchmark("lshape"), opt);
  EXPECT_NEAR(fit_rate(h.levels, &LevelRecord::h2e), 1.0 / 3.0, 0.07);
}

TEST(Run, AdaptiveRefinesTowardsReentrantCorner) {
  RunOptions opt;
  opt.max_levels = 8;
  const ConvergenceHistory h = run_adaptive(make_benchmark("lshape"), opt, [](const LevelState& s) {
    if (s.record.level < 3) return;
    double at_origin = 1e300;
    double at_corner = 0.0;
    for (Index p = 0; p < s.mesh.num_polygons(); ++p) {
      for (Index v : s.mesh.polygon(p).vertices) {
        const Point& x = s.mesh.vertex(v);
        if (x.norm() < 1e-12) at_origin = std::min(at_origin, s.mesh.polygon(p).diameter);
        if ((x - Point(-1, 1)).norm() < 1e-12) at_corner = s.mesh.polygon(p).diameter;
      }
    }
    EXPECT_LE(at_origin, 0.5 * at_corner + 1e-12) << "level " << s.record.level;
  });
  for (std::size_t k = 1; k < h.levels.size(); ++k) EXPECT_GT(h.levels[k].ndof, h.levels[k - 1].ndof);
  double peak = 0.0;
  for (std::size_t k = 1; k < h.levels.size(); ++k) {
    EXPECT_LT(h.levels[k].h2e, h.levels[k - 1].h2e);
    peak = std::max(peak, h.levels[k].h2mu);
  }
  EXPECT_LT(h.levels.back().h2mu, 0.75 * peak);
}

TEST(Run, MaxNdofStopsBeforeLargerMesh) {
  RunOptions opt;
  opt.max_levels = 10;
  opt.max_ndof = 700;
  const ConvergenceHistory h = run_uniform(make_benchmark("lshape"), opt);
  ASSERT_EQ(h.levels.size(), 4u);
  EXPECT_EQ(h.levels.back().ndof, 641u);
}

TEST(Run, HistoryIsDeterministic) {
  RunOptions opt;
  opt.max_levels = 5;
  opt.record_time = false;
  auto csv = [&] {
    std::ostringstream s;
    write_history_csv(s, run_adaptive(make_benchmark("lshape"), opt));
    return s.str();
  };
  const std::string first = csv();
  EXPECT_EQ(first, csv());
  EXPECT_EQ(first.substr(0, first.find('\n')), "level,ndof,H1e,H2e,H1mu,H2mu,eta,zeta,xi_fn,xi_nd,osc,seconds");
}

TEST(Run, RejectsBadOptions) {
  RunOptions opt;
  opt.mark.drive_m = 3;
  EXPECT_THROW(run_adaptive(make_benchmark("lshape"), opt), Error);
  opt.mark.drive_m = 2;
  opt.max_levels = 0;
  EXPECT_THROW(run_adaptive(make_benchmark("lshape"), opt), Error);
}
