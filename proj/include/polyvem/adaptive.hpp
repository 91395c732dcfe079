#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "polyvem/bench.hpp"
#include "polyvem/estimator.hpp"
#include "polyvem/mesh.hpp"
#include "polyvem/system.hpp"

namespace polyvem {

/// Dörfler marking on squared indicators: the shortest prefix of the
/// descending order (ties by ascending id) whose sum reaches theta * total.
/// Returns the marked ids in ascending order; empty if all indicators vanish.
inline std::vector<Index> dorfler_mark(std::span<const double> indicators, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw Error("dorfler_mark: theta must lie in (0, 1]");
  double total = 0.0;
  for (double v : indicators) {
    if (!(v >= 0.0)) throw Error("dorfler_mark: indicators must be non-negative and finite");
    total += v;
  }
  if (total == 0.0) return {};
  std::vector<Index> order(indicators.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return indicators[a] > indicators[b]; });
  const double target = theta * total;
  std::vector<Index> marked;
  double sum = 0.0;
  for (Index p : order) {
    if (sum >= target) break;
    sum += indicators[p];
    marked.push_back(p);
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

struct MarkParams {
  double theta = 0.5;
  int drive_m = 2;
};

enum class RefinementMode { Uniform, Adaptive };

struct RunOptions {
  RefinementMode mode = RefinementMode::Adaptive;
  MarkParams mark;
  std::size_t max_levels = 10;
  std::size_t max_ndof = 50000;  // levels above this size are not solved
  int quad_degree = kDefaultPolygonDegree;
  int edge_order = kDefaultEdgeOrder;
  SolveOptions solver;
  std::optional<double> sigma;  // overrides the benchmark value
  double zero_estimator = 1e-12;  // stop once mu falls below this
  bool record_time = true;
};

/// One row of the convergence history. Estimator columns are square roots of
/// the squared totals.
struct LevelRecord {
  std::size_t level = 0;
  std::size_t ndof = 0;
  std::size_t polygons = 0;
  double h1e = 0.0;
  double h2e = 0.0;
  double h1mu = 0.0;
  double h2mu = 0.0;
  double eta = 0.0;
  double zeta = 0.0;
  double xi_fn = 0.0;
  double xi_nd = 0.0;
  double osc = 0.0;
  double seconds = 0.0;
};

struct ConvergenceHistory {
  std::string benchmark;
  double sigma = 1.0;
  std::vector<LevelRecord> levels;
  Mesh final_mesh;
};

/// Everything known about one level, handed to the observer before refinement.
struct LevelState {
  const Mesh& mesh;
  const Discretization& discretization;
  const Estimate& estimate;
  const LevelRecord& record;
};

using LevelObserver = std::function<void(const LevelState&)>;

inline ConvergenceHistory run(const Benchmark& bench, const RunOptions& options, const LevelObserver& observer = {}) {
  if (options.mark.drive_m != 1 && options.mark.drive_m != 2) throw Error("run: drive_m must be 1 or 2");
  if (options.max_levels == 0) throw Error("run: max_levels must be positive");
  ConvergenceHistory history;
  history.benchmark = bench.name;
  history.sigma = options.sigma.value_or(bench.exact.sigma);
  const ProblemData data = problem_data(bench.exact);
  EstimatorOptions est_options{options.quad_degree, options.edge_order};

  Mesh mesh = bench.initial_mesh;
  for (std::size_t level = 1;; ++level) {
    const auto start = std::chrono::steady_clock::now();
    const Discretization disc = solve_problem(mesh, data, options.solver, options.quad_degree);
    const Estimate est = estimate(mesh, disc.elements, disc.solution, disc.source, data.boundary_value,
                                  data.boundary_gradient, history.sigma, est_options);
    const ErrorReport err = error_norms(mesh, disc.solution, bench.exact, options.quad_degree);

    LevelRecord rec;
    rec.level = level;
    rec.ndof = disc.dof_map.size();
    rec.polygons = mesh.num_polygons();
    rec.h1e = err.h1e;
    rec.h2e = err.h2e;
    rec.h1mu = std::sqrt(est.weighted.h1mu2);
    rec.h2mu = std::sqrt(est.weighted.h2mu2);
    rec.eta = std::sqrt(est.totals.eta2);
    rec.zeta = std::sqrt(est.totals.zeta2);
    rec.xi_fn = std::sqrt(est.totals.xi2_fn);
    rec.xi_nd = std::sqrt(est.totals.xi2_nd);
    rec.osc = std::sqrt(est.totals.osc2);
    if (!history.levels.empty() && rec.ndof <= history.levels.back().ndof) {
      throw Error("run: ndof did not increase at level " + std::to_string(level) + " (" +
                  std::to_string(rec.ndof) + " after " + std::to_string(history.levels.back().ndof) + ")");
    }
    if (options.record_time) {
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    history.levels.push_back(rec);
    if (observer) observer(LevelState{mesh, disc, est, history.levels.back()});

    if (level >= options.max_levels) break;
    if (std::sqrt(est.totals.mu2) <= options.zero_estimator) break;

    Mesh next;
    if (options.mode == RefinementMode::Uniform) {
      next = uniform_refine(mesh);
    } else {
      const std::vector<double> ind = weighted_indicators(est.field, history.sigma, options.mark.drive_m);
      const std::vector<Index> marked = dorfler_mark(ind, options.mark.theta);
      if (marked.empty()) break;
      next = refine(mesh, marked);
    }
    if (next.num_vertices() + next.num_edges() > options.max_ndof) break;
    mesh = std::move(next);
  }
  history.final_mesh = std::move(mesh);
  return history;
}

inline ConvergenceHistory run_adaptive(const Benchmark& bench, RunOptions options, const LevelObserver& observer = {}) {
  options.mode = RefinementMode::Adaptive;
  return run(bench, options, observer);
}

inline ConvergenceHistory run_uniform(const Benchmark& bench, RunOptions options, const LevelObserver& observer = {}) {
  options.mode = RefinementMode::Uniform;
  return run(bench, options, observer);
}

/// Negative least-squares slope of log(value) against log(ndof) over the last
/// `last` levels. NaN if fewer than two usable levels.
inline double fit_rate(const std::vector<LevelRecord>& levels, double LevelRecord::*value, std::size_t last = 3) {
  const std::size_t n = std::min(last, levels.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (std::size_t i = levels.size() - n; i < levels.size(); ++i) {
    const double v = levels[i].*value;
    if (!(v > 0.0)) continue;
    const double x = std::log(static_cast<double>(levels[i].ndof));
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const double k = static_cast<double>(m);
  const double denom = k * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return -(k * sxy - sx * sy) / denom;
}

/// CSV: level,ndof,H1e,H2e,H1mu,H2mu,eta,zeta,xi_fn,xi_nd,osc,seconds
inline void write_history_csv(std::ostream& out, const ConvergenceHistory& history) {
  const auto old = out.precision(17);
  out << "level,ndof,H1e,H2e,H1mu,H2mu,eta,zeta,xi_fn,xi_nd,osc,seconds\n";
  for (const LevelRecord& r : history.levels) {
    out << r.level << ',' << r.ndof << ',' << r.h1e << ',' << r.h2e << ',' << r.h1mu << ',' << r.h2mu << ','
        << r.eta << ',' << r.zeta << ',' << r.xi_fn << ',' << r.xi_nd << ',' << r.osc << ',' << r.seconds << '\n';
  }
  out.precision(old);
}

}  // namespace polyvem
