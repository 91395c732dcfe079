// Command-line benchmark runner.
//
//   polyvem run --benchmark lshape --mode adaptive --levels 15 --check
//   polyvem run --config run.toml --out results
//   polyvem list

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyvem/polyvem.hpp"
#include "svg_plot.hpp"

namespace fs = std::filesystem;
using namespace polyvem;

namespace {

struct RunConfig {
  std::string benchmark = "lshape";
  std::string mode = "adaptive";
  double theta = 0.5;
  int drive_m = 2;
  std::optional<double> sigma;
  std::size_t levels = 10;
  std::size_t max_ndof = 50000;
  int quad_degree = kDefaultPolygonDegree;
  std::string solver = "auto";
  std::string out = "out";
  std::string run_id;
  std::string mesh_file;
  bool check = false;
  bool no_timing = false;
};

struct Band {
  double lo;
  double hi;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct Thresholds {
  std::optional<Band> h2_rate;
  std::optional<Band> h1_rate;
};

// Rate bands used by --check, per benchmark and mode.
Thresholds thresholds_for(const std::string& benchmark, RefinementMode mode) {
  const bool uniform = mode == RefinementMode::Uniform;
  if (benchmark == "smooth_square" && uniform) return {Band{0.42, 0.58}, Band{0.85, 1.1}};
  if (benchmark == "lshape") {
    return uniform ? Thresholds{Band{0.26, 0.41}, Band{0.55, 0.80}} : Thresholds{Band{0.42, 0.58}, Band{0.72, 0.95}};
  }
  if (benchmark == "zshape") return uniform ? Thresholds{Band{0.18, 0.33}, {}} : Thresholds{Band{0.42, 0.58}, {}};
  return {};
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

RunOptions to_options(const RunConfig& cfg) {
  RunOptions o;
  if (cfg.mode == "uniform") {
    o.mode = RefinementMode::Uniform;
  } else if (cfg.mode == "adaptive") {
    o.mode = RefinementMode::Adaptive;
  } else {
    throw CLI::ValidationError("mode", "must be 'uniform' or 'adaptive', got '" + cfg.mode + "'");
  }
  o.mark.theta = cfg.theta;
  o.mark.drive_m = cfg.drive_m;
  o.max_levels = cfg.levels;
  o.max_ndof = cfg.max_ndof;
  o.quad_degree = cfg.quad_degree;
  o.sigma = cfg.sigma;
  o.record_time = !cfg.no_timing;
  if (cfg.solver == "auto") {
    o.solver.kind = SolverKind::Automatic;
  } else if (cfg.solver == "direct") {
    o.solver.kind = SolverKind::Direct;
  } else if (cfg.solver == "cg") {
    o.solver.kind = SolverKind::ConjugateGradient;
  } else {
    throw CLI::ValidationError("solver", "must be 'auto', 'direct' or 'cg', got '" + cfg.solver + "'");
  }
  return o;
}

void write_plots(const fs::path& dir, const std::string& id, const ConvergenceHistory& h) {
  std::vector<double> ndof, h1e, h2e, h1mu, h2mu, eta, zeta, xi_fn, xi_nd, osc;
  for (const auto& r : h.levels) {
    ndof.push_back(static_cast<double>(r.ndof));
    h1e.push_back(r.h1e);
    h2e.push_back(r.h2e);
    h1mu.push_back(r.h1mu);
    h2mu.push_back(r.h2mu);
    eta.push_back(r.eta);
    zeta.push_back(r.zeta);
    xi_fn.push_back(r.xi_fn);
    xi_nd.push_back(r.xi_nd);
    osc.push_back(r.osc);
  }
  const double s = h.sigma;
  {
    plot::LogLogPlot p{h.benchmark + ": H2 error and estimator", "ndof", "H2e, H2mu", {}, {}};
    p.series = {{"H2e", ndof, h2e, "#1f77b4"}, {"H2mu", ndof, h2mu, "#d62728", true}};
    p.references = {{-0.5, "1/2"}, {-s / 2.0, fmt(s / 2.0, 3)}};
    std::ofstream f(dir / (id + "_m2.svg"));
    plot::write_svg(f, p);
  }
  {
    plot::LogLogPlot p{h.benchmark + ": H1 error and estimator", "ndof", "H1e, H1mu", {}, {}};
    p.series = {{"H1e", ndof, h1e, "#1f77b4"}, {"H1mu", ndof, h1mu, "#d62728", true}};
    p.references = {{-(1.0 + s) / 2.0, fmt((1.0 + s) / 2.0, 3)}, {-s, fmt(s, 3)}};
    std::ofstream f(dir / (id + "_m1.svg"));
    plot::write_svg(f, p);
  }
  {
    plot::LogLogPlot p{h.benchmark + ": estimator components", "ndof", "component", {}, {}};
    p.series = {{"eta", ndof, eta, "#2ca02c"},
                {"zeta", ndof, zeta, "#ff7f0e"},
                {"xi_fn", ndof, xi_fn, "#9467bd"},
                {"xi_nd", ndof, xi_nd, "#8c564b"},
                {"osc", ndof, osc, "#7f7f7f", true}};
    p.references = {{-0.5, "1/2"}};
    std::ofstream f(dir / (id + "_components.svg"));
    plot::write_svg(f, p);
  }
}

int run_command(const RunConfig& cfg) {
  RunOptions options;
  Benchmark bench;
  try {
    options = to_options(cfg);
    if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw CLI::ValidationError("theta", "must lie in (0, 1]");
    if (cfg.drive_m != 1 && cfg.drive_m != 2) throw CLI::ValidationError("drive-m", "must be 1 or 2");
    if (cfg.levels == 0) throw CLI::ValidationError("levels", "must be positive");
    if (cfg.sigma && !(*cfg.sigma > 0.0 && *cfg.sigma <= 1.0)) throw CLI::ValidationError("sigma", "must lie in (0, 1]");
    bench = make_benchmark(cfg.benchmark);
    if (!cfg.mesh_file.empty()) {
      std::ifstream in(cfg.mesh_file);
      if (!in) throw Error("cannot open mesh file '" + cfg.mesh_file + "'");
      bench.initial_mesh = read_mesh(in);
    }
  } catch (const std::exception& e) {
    std::cerr << "polyvem: configuration error: " << e.what() << '\n';
    return 1;
  }

  const std::string id = cfg.run_id.empty() ? cfg.benchmark + "_" + cfg.mode : cfg.run_id;
  const fs::path dir(cfg.out);
  fs::create_directories(dir);

  std::cout << "benchmark " << bench.name << ", mode " << cfg.mode << ", sigma "
            << fmt(options.sigma.value_or(bench.exact.sigma), 6) << '\n';
  std::cout << "level       ndof         H2e         H2mu         H1e         H1mu\n";
  ConvergenceHistory history;
  try {
    history = run(bench, options, [&](const LevelState& s) {
      std::ofstream csv(dir / (id + "_estimator_L" + std::to_string(s.record.level) + ".csv"));
      write_estimator_csv(csv, s.estimate.field);
      const LevelRecord& r = s.record;
      std::printf("%5zu %10zu %11.4e  %11.4e %11.4e  %11.4e\n", r.level, r.ndof, r.h2e, r.h2mu, r.h1e, r.h1mu);
      std::fflush(stdout);
      // overwritten per level, so the files end up holding the final level
      std::ofstream sol(dir / (id + "_solution.txt"));
      write_solution(sol, s.discretization.solution);
      std::ofstream proj(dir / (id + "_projections.txt"));
      write_projections(proj, s.discretization.solution);
    });
  } catch (const std::exception& e) {
    std::cerr << "polyvem: run failed: " << e.what() << '\n';
    return 3;
  }

  {
    std::ofstream csv(dir / (id + "_history.csv"));
    write_history_csv(csv, history);
    std::ofstream mesh(dir / (id + "_mesh.txt"));
    write_mesh(mesh, history.final_mesh);
  }
  write_plots(dir, id, history);

  const auto& levels = history.levels;
  const double r2 = fit_rate(levels, &LevelRecord::h2e);
  const double r1 = fit_rate(levels, &LevelRecord::h1e);
  std::cout << "rate H2e " << fmt(r2) << "  H1e " << fmt(r1) << "  H2mu " << fmt(fit_rate(levels, &LevelRecord::h2mu))
            << "  H1mu " << fmt(fit_rate(levels, &LevelRecord::h1mu)) << "  (last " << std::min<std::size_t>(3, levels.size())
            << " levels vs ndof)\n";
  double e2lo = INFINITY, e2hi = 0, e1lo = INFINITY, e1hi = 0;
  for (const auto& r : levels) {
    if (r.h2e > 0.0) e2lo = std::min(e2lo, r.h2mu / r.h2e), e2hi = std::max(e2hi, r.h2mu / r.h2e);
    if (r.h1e > 0.0) e1lo = std::min(e1lo, r.h1mu / r.h1e), e1hi = std::max(e1hi, r.h1mu / r.h1e);
  }
  if (e2hi > 0.0) std::cout << "efficiency H2mu/H2e in [" << fmt(e2lo) << ", " << fmt(e2hi) << "]\n";
  if (e1hi > 0.0) std::cout << "efficiency H1mu/H1e in [" << fmt(e1lo) << ", " << fmt(e1hi) << "]\n";
  std::cout << "outputs in " << dir.string() << '/' << id << "_*\n";

  if (!cfg.check) return 0;
  std::vector<std::string> violations;
  const LevelRecord& last = levels.back();
  if (bench.name == "patch_p2") {
    const double mu = std::sqrt(last.eta * last.eta + last.zeta * last.zeta + last.xi_fn * last.xi_fn + last.xi_nd * last.xi_nd);
    if (!(last.h2e <= 1e-8)) violations.push_back("H2e " + fmt(last.h2e) + " > 1e-8");
    if (!(mu <= 1e-7)) violations.push_back("mu " + fmt(mu) + " > 1e-7");
  }
  const Thresholds t = thresholds_for(bench.name, options.mode);
  if ((t.h2_rate || t.h1_rate) && levels.size() < 3) violations.push_back("fewer than 3 levels, rates not checked");
  if (levels.size() >= 3) {
    if (t.h2_rate && !t.h2_rate->contains(r2)) {
      violations.push_back("H2e rate " + fmt(r2) + " outside [" + fmt(t.h2_rate->lo) + ", " + fmt(t.h2_rate->hi) + "]");
    }
    if (t.h1_rate && !t.h1_rate->contains(r1)) {
      violations.push_back("H1e rate " + fmt(r1) + " outside [" + fmt(t.h1_rate->lo) + ", " + fmt(t.h1_rate->hi) + "]");
    }
  }
  if (bench.name != "patch_p2") {
    for (const auto& r : levels) {
      if (r.ndof < 100) continue;
      if (r.h2mu < r.h2e || r.h1mu < r.h1e) violations.push_back("estimator below error at level " + std::to_string(r.level));
    }
  }
  for (const auto& v : violations) std::cout << "CHECK FAILED: " << v << '\n';
  if (violations.empty()) std::cout << "CHECK PASSED\n";
  return violations.empty() ? 0 : 2;
}

const std::vector<std::string> kConfigKeys{"benchmark", "mode",   "theta",  "drive-m", "sigma",     "levels",   "max-ndof",
                                           "quad-degree", "solver", "out", "run-id", "mesh-file", "check", "no-timing"};
const std::vector<std::string> kFlagKeys{"check", "no-timing"};

// Reads "key = value" lines ('#' comments, optional quotes, '_' or '-' in keys)
// and returns the equivalent command-line tokens.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("config", "cannot open '" + path + "'");
  auto trim = [](std::string v) {
    const auto a = v.find_first_not_of(" \t\r");
    const auto b = v.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
  };
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("config", path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
      throw CLI::ValidationError("config", path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (std::find(kFlagKeys.begin(), kFlagKeys.end(), key) != kFlagKeys.end()) {
      if (value == "true") {
        tokens.push_back("--" + key);
      } else if (value != "false") {
        throw CLI::ValidationError("config", path + ":" + std::to_string(lineno) + ": '" + key + "' expects true or false");
      }
      continue;
    }
    tokens.push_back("--" + key);
    tokens.push_back(value);
  }
  return tokens;
}

// Command-line tokens with the contents of "--config FILE" placed right after
// the subcommand, so explicit flags take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    std::size_t consumed = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      consumed = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      consumed = 1;
    } else {
      continue;
    }
    const std::vector<std::string> tokens = config_tokens(path);
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + consumed));
    const auto run = std::find(args.begin(), args.end(), "run");
    const auto at = run == args.end() ? args.begin() : run + 1;
    args.insert(at, tokens.begin(), tokens.end());
    break;
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonconforming virtual element solver for the biharmonic plate problem"};
  app.require_subcommand(1);

  RunConfig cfg;
  CLI::App* run = app.add_subcommand("run", "Solve a benchmark on a sequence of meshes");
  run->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_file;
  run->add_option("--config", config_file, "key = value configuration file; command-line flags override it");
  run->add_option("--benchmark", cfg.benchmark, "lshape | zshape | smooth_square | patch_p2")->capture_default_str();
  run->add_option("--mode", cfg.mode, "uniform | adaptive")->capture_default_str();
  run->add_option("--theta", cfg.theta, "Dörfler bulk parameter in (0, 1]")->capture_default_str();
  run->add_option("--drive-m", cfg.drive_m, "weighted indicator driving the marking (1 or 2)")->capture_default_str();
  run->add_option("--sigma", cfg.sigma, "override the regularity weight of the benchmark");
  run->add_option("--levels", cfg.levels, "maximum number of levels")->capture_default_str();
  run->add_option("--max-ndof", cfg.max_ndof, "do not solve meshes with more dofs")->capture_default_str();
  run->add_option("--quad-degree", cfg.quad_degree, "polygon quadrature degree")->capture_default_str();
  run->add_option("--solver", cfg.solver, "auto | direct | cg")->capture_default_str();
  run->add_option("--out", cfg.out, "output directory")->capture_default_str();
  run->add_option("--run-id", cfg.run_id, "output file prefix (default <benchmark>_<mode>)");
  run->add_option("--mesh-file", cfg.mesh_file, "initial mesh replacing the benchmark mesh");
  run->add_flag("--check", cfg.check, "exit with status 2 if a convergence threshold is violated");
  run->add_flag("--no-timing", cfg.no_timing, "write 0 in the seconds column (byte-stable CSV)");

  CLI::App* list = app.add_subcommand("list", "List the available benchmarks");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (list->parsed()) {
    for (const auto& name : benchmark_names()) std::cout << name << '\n';
    return 0;
  }
  return run_command(cfg);
}
