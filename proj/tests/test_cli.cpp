#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("polyvem_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + POLYVEM_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream s(line);
    for (std::string c; std::getline(s, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, PatchCheckPasses) {
  const fs::path dir = scratch("patch");
  EXPECT_EQ(cli("run --benchmark patch_p2 --mode uniform --levels 1 --check --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "patch_p2_uniform_history.csv"));
}

TEST(Cli, LShapeUniformHistory) {
  const fs::path dir = scratch("lshape");
  ASSERT_EQ(cli("run --benchmark lshape --mode uniform --levels 4 --no-timing --out " + dir.string()), 0);
  const auto rows = csv_rows(dir / "lshape_uniform_history.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0][1], "ndof");
  for (std::size_t k = 2; k < rows.size(); ++k) EXPECT_GT(std::stoul(rows[k][1]), std::stoul(rows[k - 1][1]));
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_EQ(rows[k].back(), "0");
  for (int level = 1; level <= 4; ++level) {
    EXPECT_TRUE(fs::exists(dir / ("lshape_uniform_estimator_L" + std::to_string(level) + ".csv")));
  }
  EXPECT_TRUE(fs::exists(dir / "lshape_uniform_mesh.txt"));
  for (const char* svg : {"_m1.svg", "_m2.svg", "_components.svg"}) {
    const std::string text = slurp(dir / (std::string("lshape_uniform") + svg));
    EXPECT_EQ(text.rfind("<svg", 0) == 0 || text.rfind("<?xml", 0) == 0, true) << svg;
    EXPECT_NE(text.find("</svg>"), std::string::npos) << svg;
  }
}

TEST(Cli, NoTimingRerunIsByteIdentical) {
  const fs::path a = scratch("rerun_a");
  const fs::path b = scratch("rerun_b");
  const std::string args = "run --benchmark lshape --mode adaptive --levels 4 --no-timing --out ";
  ASSERT_EQ(cli(args + a.string()), 0);
  ASSERT_EQ(cli(args + b.string()), 0);
  for (const char* f : {"lshape_adaptive_history.csv", "lshape_adaptive_mesh.txt", "lshape_adaptive_estimator_L3.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Cli, ConfigurationErrorsExitOne) {
  const fs::path dir = scratch("errors");
  EXPECT_EQ(cli("run --benchmark nowhere --out " + dir.string()), 1);
  EXPECT_EQ(cli("run --theta 1.5 --out " + dir.string()), 1);
  EXPECT_EQ(cli("run --mode sideways --out " + dir.string()), 1);
  EXPECT_EQ(cli("run --frobnicate 3 --out " + dir.string()), 1);
  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "benchmark = lshape\ncolour = blue\n";
  }
  EXPECT_EQ(cli("run --config " + (dir / "bad.cfg").string() + " --out " + dir.string()), 1);
}

TEST(Cli, ConfigFileIsApplied) {
  const fs::path dir = scratch("config");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# two uniform levels\nbenchmark = \"lshape\"\nmode = uniform\nlevels = 2\nrun_id = cfg\nno_timing = true\n";
  }
  ASSERT_EQ(cli("run --config " + (dir / "run.cfg").string() + " --out " + dir.string()), 0);
  EXPECT_EQ(csv_rows(dir / "cfg_history.csv").size(), 3u);
  ASSERT_EQ(cli("run --config " + (dir / "run.cfg").string() + " --levels 3 --out " + dir.string()), 0);
  EXPECT_EQ(csv_rows(dir / "cfg_history.csv").size(), 4u);
}

TEST(Cli, ListsBenchmarks) { EXPECT_EQ(cli("list"), 0); }
