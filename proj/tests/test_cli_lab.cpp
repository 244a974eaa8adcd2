#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "idla/cli_lab.hpp"
#include "idla/idla_engine.hpp"

using namespace idla;
using namespace idla::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("idla_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(IDLA_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_snapshot_file(const fs::path& p, const GrowthHistory& h) {
  std::ofstream out(p, std::ios::binary);
  write_snapshot(out, h);
}

// The n sites nearest the origin, except for one hole at distance close to
// r - dev, so the inner deviation is dev up to lattice rounding.
GrowthHistory disk_with_hole(std::uint64_t n, double dev) {
  const double r = std::sqrt(double(n) / std::numbers::pi);
  const int box = int(r) + 4;
  std::vector<LatticePoint> pts;
  for (int y = -box; y <= box; ++y)
    for (int x = -box; x <= box; ++x) pts.push_back({x, y});
  std::stable_sort(pts.begin(), pts.end(), [](LatticePoint a, LatticePoint b) { return norm2(a) < norm2(b); });
  LatticePoint hole = pts.back();
  // off the axes and diagonals every site keeps a nearer neighbour
  for (LatticePoint z : pts)
    if (z.y > 0 && z.x > z.y + 1 && std::abs(norm(z) - (r - dev)) < std::abs(norm(hole) - (r - dev))) hole = z;
  std::vector<LatticePoint> order;
  for (LatticePoint z : pts) {
    if (order.size() == n) break;
    if (z != hole) order.push_back(z);
  }
  return GrowthHistory::from_order(order);
}

}  // namespace

TEST_CASE("configuration keys") {
  ExperimentConfig cfg;
  apply_key(cfg, "sizes", "1e3,2000");
  CHECK(cfg.sizes == std::vector<std::uint64_t>{1000, 2000});
  apply_key(cfg, "zeta", "10,0;20,12");
  REQUIRE(cfg.zeta.size() == 2);
  CHECK(cfg.zeta[1] == LatticePoint{20, 12});
  apply_key(cfg, "b", "0.25");
  CHECK(cfg.b == 0.25);
  CHECK_THROWS_AS(apply_key(cfg, "no_such_key", "1"), Error);
  CHECK_THROWS_AS(apply_key(cfg, "trials", "many"), Error);

  load_config_text(cfg, "# comment\nseed = 99\n\n  trials=3  # trailing\nradii = 5, 7\n");
  CHECK(cfg.seed == 99);
  CHECK(cfg.trials == 3);
  CHECK(cfg.radii == std::vector<double>{5.0, 7.0});
  CHECK_THROWS_AS(load_config_text(cfg, "seed 3\n"), Error);
  CHECK_THROWS_AS(load_config_file(cfg, "/nonexistent/idla.cfg"), Error);

  ExperimentConfig a, b;
  a.threads = 1;
  b.threads = 8;
  CHECK(config_json(a) == config_json(b));
  CHECK(config_json(a).find("threads") == std::string::npos);
  CHECK(config_help().find("seed = 1") != std::string::npos);
}

TEST_CASE("helpers") {
  const LinearFit f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(fit_line({1, 2, 3}, {4, 4, 4}).r2 == 1.0);
  CHECK(quantile({3, 1, 2, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({3, 1, 2, 4}, 0.0) == 1.0);
  CHECK(quantile({3, 1, 2, 4}, 1.0) == 4.0);
  CHECK(direction_point(10.0, 0, 16) == LatticePoint{10, 0});
  CHECK(direction_point(10.0, 4, 16) == LatticePoint{0, 10});
  CHECK(direction_point(10.0, 2, 16) == LatticePoint{7, 7});
}

TEST_CASE("simulate is reproducible and independent of the thread count") {
  ExperimentConfig cfg;
  cfg.command = "simulate";
  cfg.sizes = {100, 300};
  cfg.trials = 3;
  cfg.seed = 5;
  cfg.out = scratch("sim1");
  cfg.threads = 1;
  const CommandResult r1 = run_command(cfg);
  CHECK(r1.pass());
  ExperimentConfig cfg2 = cfg;
  cfg2.out = scratch("sim2");
  cfg2.threads = 4;
  const CommandResult r2 = run_command(cfg2);
  REQUIRE(r1.files.size() == r2.files.size());
  CHECK(r1.files.size() == 3 + 6);
  for (std::size_t i = 0; i < r1.files.size(); ++i) {
    CHECK(fs::relative(r1.files[i], cfg.out) == fs::relative(r2.files[i], cfg2.out));
    CHECK(slurp(r1.files[i]) == slurp(r2.files[i]));
  }
  const std::string csv = slurp(cfg.out / "simulate.csv");
  CHECK(csv.rfind("# {", 0) == 0);
  CHECK(csv.find("\"build\"") != std::string::npos);

  // snapshot files survive a read and rewrite unchanged
  const fs::path snap = cfg.out / "snapshots" / "n300_t0002.idla";
  std::ifstream in(snap, std::ios::binary);
  const GrowthHistory h = read_snapshot(in);
  std::ostringstream os(std::ios::binary);
  write_snapshot(os, h);
  CHECK(os.str() == slurp(snap));
  fs::remove_all(cfg.out);
  fs::remove_all(cfg2.out);
}

TEST_CASE("analyze recovers planted deviation laws") {
  const std::vector<std::uint64_t> sizes = {2000, 8000, 30000, 100000};

  const fs::path flat = scratch("flat");
  fs::create_directories(flat / "snapshots");
  for (std::uint64_t n : sizes) write_snapshot_file(flat / "snapshots" / ("n" + std::to_string(n) + "_t0000.idla"),
                                                    disk_with_hole(n, 1.5));
  ExperimentConfig cfg;
  cfg.command = "analyze";
  cfg.out = flat;
  const CommandResult a = run_command(cfg);
  REQUIRE_FALSE(a.checks.empty());
  CHECK(a.checks[0].name == "mean_deviation_within_4_log_r");
  CHECK(a.checks[0].pass);
  const std::string report = slurp(flat / "analyze.json");
  CHECK(report.find("\"slope\"") != std::string::npos);

  const fs::path planted = scratch("planted");
  fs::create_directories(planted / "snapshots");
  for (std::uint64_t n : sizes) {
    const double r = std::sqrt(double(n) / std::numbers::pi);
    write_snapshot_file(planted / "snapshots" / ("n" + std::to_string(n) + "_t0000.idla"),
                        disk_with_hole(n, 2.0 * std::log(r)));
  }
  cfg.out = planted;
  run_command(cfg);
  const std::string planted_report = slurp(planted / "analyze.json");
  const auto pos = planted_report.find("\"fit_log_r\"");
  REQUIRE(pos != std::string::npos);
  const auto slope_at = planted_report.find("\"slope\":", pos);
  REQUIRE(slope_at != std::string::npos);
  const double slope = std::stod(planted_report.substr(slope_at + 8));
  CHECK(slope == doctest::Approx(2.0).epsilon(0.1));

  const auto flat_pos = report.find("\"fit_log_r\"");
  const double flat_slope = std::stod(report.substr(report.find("\"slope\":", flat_pos) + 8));
  CHECK(std::abs(flat_slope) < 0.2);
  if (std::getenv("KEEP") == nullptr) {
    fs::remove_all(flat);
    fs::remove_all(planted);
  }
}

TEST_CASE("tool exit codes") {
  const fs::path out = scratch("tower");
  const std::string fixture = std::string(IDLA_FIXTURE_DIR);
  CHECK(run_tool("tower --config " + fixture + "/tower.cfg --set sites_file=" + fixture +
                 "/shells_figure.txt --out " + out.string()) == 0);
  CHECK(fs::exists(out / "tower.json"));
  CHECK(run_tool("tower --set expect_beta=5,3,2,2 --out " + out.string()) == 1);
  CHECK(run_tool("tower --set bogus=1 --out " + out.string()) == 2);
  CHECK(run_tool("no-such-command") != 0);
  fs::remove_all(out);
}
