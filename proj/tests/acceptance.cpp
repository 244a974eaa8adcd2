// Acceptance run: one PASS/FAIL line per criterion A1..A9.
//
// Usage: idla_acceptance [A1 A2 ...]   (no arguments = all criteria)
// IDLA_A3_FULL=1 adds n = 4e5 to the fluctuation sweep.
//
// The exit status is 0 when every criterion ends as pinned in known_failures()
// below, and 1 otherwise (including an unexpected pass).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "idla/cli_lab.hpp"
#include "idla/event_detect.hpp"
#include "idla/harmonic_field.hpp"
#include "idla/idla_engine.hpp"
#include "idla/martingale_lab.hpp"
#include "idla/parallel.hpp"
#include "idla/potential_kernel.hpp"
#include "idla/rng.hpp"

using namespace idla;
using namespace idla::cli;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Pinned settings.

constexpr std::uint64_t kSeed = 20260101;

constexpr int kKernelRadius = 64;
constexpr std::uint64_t kLaplacianSamples = 500;
constexpr double kA1Seconds = 10.0;
constexpr double kResidualLimit = 1.0;
constexpr double kLambdaStability = 1e-4;

constexpr std::uint64_t kA3Trials = 30;
constexpr double kA3LogFactor = 4.0;

constexpr double kA4Seconds = 300.0;

constexpr double kA5Seconds = 120.0;
constexpr std::uint64_t kMgfPaths = 1'000'000;
constexpr double kMgfTarget = 1.139494;
constexpr double kMgfRelative = 0.01;
constexpr std::uint64_t kTailPaths = 200'000;
constexpr std::uint64_t kTailSteps = 2048;

constexpr double kA6Seconds = 600.0;
constexpr std::uint64_t kA6Seeds = 1000;

constexpr double kA7Seconds = 60.0;
constexpr double kEnergyFloor = 0.3;

constexpr double kA8Seconds = 900.0;
constexpr std::uint64_t kComplementHistories = 100;
constexpr std::uint64_t kComplementSize = 10'000;
constexpr std::uint64_t kTentacleTrials = 50;
constexpr std::uint64_t kTentacleSize = 100'000;
constexpr double kTentacleB = 0.1;
constexpr int kTentacleM = 20;

bool a3_full() {
  const char* full = std::getenv("IDLA_A3_FULL");
  return full != nullptr && std::string(full) == "1";
}

// Criteria expected to end red.
// A4: only through the strict sign of H(zeta + 1) at diagonal poles, where the
//     value is exactly 0.
// A3: only through gate (ii) on the reduced sweep. Over r in [56, 252] the
//     curves ln r and r^(1/3) are almost collinear, and with 30 trials the r2
//     comparison goes either way. The full sweep passes with this seed.
std::set<std::string> known_failures() {
  std::set<std::string> ids = {"A4"};
  if (!a3_full()) ids.insert("A3");
  return ids;
}

// ---------------------------------------------------------------------------

struct Outcome {
  bool pass = false;
  std::string detail;
  bool known_reason = true;  ///< for pinned failures: failed for the pinned reason only
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

fs::path g_scratch;

fs::path scratch(const std::string& name) {
  const fs::path p = g_scratch / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const Check* find_check(const CommandResult& r, const std::string& name) {
  for (const Check& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

bool check_pass(const CommandResult& r, const std::string& name) {
  const Check* c = find_check(r, name);
  return c != nullptr && c->pass;
}

// ---------------------------------------------------------------------------

Outcome a1_kernel_exactness() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.command = "kernel";
  cfg.kernel_radius = kKernelRadius;
  cfg.samples = kLaplacianSamples;
  cfg.seed = kSeed;
  cfg.out = scratch("a1");
  const CommandResult r = cmd_kernel(cfg);
  const double secs = seconds_since(t0);
  bool ok = secs < kA1Seconds;
  std::string failed;
  for (const char* name : {"g(1,0)=1", "g(1,1)=4/pi", "g(2,0)=4-8/pi", "laplacian_origin_is_1", "laplacian_zero_off_origin"}) {
    if (!check_pass(r, name)) {
      ok = false;
      failed += std::string(" ") + name;
    }
  }
  return {ok, "exact g(1), g(1+i), g(2); Laplacian 1 at 0 and 0 at " + std::to_string(kLaplacianSamples) +
                  " samples; " + fmt("%.2f", secs) + " s (limit " + fmt("%.0f", kA1Seconds) + " s)" +
                  (failed.empty() ? "" : "; failed:" + failed)};
}

Outcome a2_asymptotics() {
  const KernelTable t = build_kernel_table(kKernelRadius);
  const double lambda = t.lambda_hat();
  double worst = 0.0;
  for (int y = -kKernelRadius; y <= kKernelRadius; ++y)
    for (int x = -kKernelRadius; x <= kKernelRadius; ++x) {
      const LatticePoint z{x, y};
      const double r = norm(z);
      if (r < 10.0 || r > kKernelRadius) continue;
      worst = std::max(worst, r * r * std::abs(t(z) - 2.0 / std::numbers::pi * std::log(r) - lambda));
    }
  auto g = [&](LatticePoint z) { return t(z); };
  const double r0 = kKernelRadius;
  const double inner = fit_lambda_ring(g, r0 / 2, 3 * r0 / 4).lambda;
  const double outer = fit_lambda_ring(g, 3 * r0 / 4, r0).lambda;
  const double spread = std::abs(inner - outer);
  const double exact = (2.0 * std::numbers::egamma + std::log(8.0)) / std::numbers::pi;
  const bool ok = worst <= kResidualLimit && spread <= kLambdaStability;
  return {ok, "max |z|^2 residual " + fmt("%.4f", worst) + " (limit 1.0); ring lambda spread " + fmt("%.2e", spread) +
                  " (limit 1e-4); lambda_hat " + fmt("%.9f", lambda) + " vs closed form " + fmt("%.9f", exact)};
}

Outcome a3_fluctuations() {
  std::vector<std::uint64_t> sizes = {10'000, 40'000, 100'000, 200'000};
  const bool with_full = a3_full();
  if (with_full) sizes.push_back(400'000);

  std::vector<double> log_r, cube_r, means;
  bool gate1 = true;
  std::string per_size;
  std::uint64_t steps = 0;
  for (std::uint64_t n : sizes) {
    std::vector<double> dev(kA3Trials);
    std::vector<std::uint64_t> trial_steps(kA3Trials);
    const double r = std::sqrt(double(n) / std::numbers::pi);
    parallel_for(kA3Trials, default_threads(), [&](std::size_t t) {
      // same seeds as `idla-lab simulate --seed kSeed --trials 30 --sizes n`
      const GrowthHistory h = idla_grow(n, derive_seed(kSeed, n, t));
      dev[t] = std::max(r - inner_radius(h, n), outer_radius(h, n) - r);
      trial_steps[t] = h.total_steps();
    });
    double mean = 0.0;
    for (std::size_t t = 0; t < kA3Trials; ++t) {
      mean += dev[t];
      steps += trial_steps[t];
    }
    mean /= double(kA3Trials);
    gate1 = gate1 && mean <= kA3LogFactor * std::log(r);
    per_size += " n=" + std::to_string(n) + ":" + fmt("%.3f", mean) + "/" + fmt("%.2f", kA3LogFactor * std::log(r));
    log_r.push_back(std::log(r));
    cube_r.push_back(std::cbrt(r));
    means.push_back(mean);
  }
  const LinearFit lf = fit_line(log_r, means);
  const LinearFit cf = fit_line(cube_r, means);
  const bool gate2 = lf.r2 > cf.r2;
  return {gate1 && gate2, std::string("gate (i) ") + (gate1 ? "pass" : "FAIL") + ", gate (ii) " +
                              (gate2 ? "pass" : "FAIL") + "; mean max-deviation / 4 ln r:" + per_size + "; r2 log " + fmt("%.4f", lf.r2) +
                              " vs cbrt " + fmt("%.4f", cf.r2) + "; slope " + fmt("%.3f", lf.slope) + "; " +
                              fmt("%.3g", double(steps)) + " walk steps" +
                              (with_full ? "" : "; n=4e5 omitted (set IDLA_A3_FULL=1)"),
          gate1 && !gate2};
}

Outcome a4_harmonic() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.command = "harmonic";
  cfg.radii = {10, 20, 50, 100, 200};
  cfg.directions = 16;
  cfg.seed = kSeed;
  cfg.out = scratch("a4");
  const CommandResult r = cmd_harmonic(cfg);
  const double secs = seconds_since(t0);

  // Sign sub-check recomputed with the diagonal case separated out.
  const KernelTable table = build_kernel_table(8);
  std::size_t strict_fail = 0, diagonal_zero = 0, other_fail = 0, poles = 0;
  for (double rad : cfg.radii)
    for (int j = 0; j < cfg.directions; ++j) {
      const LatticePoint z = direction_point(rad, j, cfg.directions);
      const HarmonicPole p = make_pole(z);
      const auto ex = exceptional_points(p);
      // both values only touch the kernel next to the origin
      const double h1 = h_zeta(p, table, ex[1]);
      const double h2 = h_zeta(p, table, ex[2]);
      ++poles;
      const bool diag = std::abs(z.x) == std::abs(z.y);
      if (!(h1 < 0.0 && h2 < 0.0)) {
        ++strict_fail;
        if (diag && h1 == 0.0 && h2 < 0.0) ++diagonal_zero;
        else ++other_fail;
      }
    }

  const bool sign_ok = check_pass(r, "h_negative_next_to_pole");
  bool rest_ok = secs < kA4Seconds;
  std::string failed;
  for (const char* name : {"h_pole_in_[1,2]", "harmonic_in_omega", "omega_within_rho_pm_5",
                           "mean_value_sum_within_5_log_rho"}) {
    if (!check_pass(r, name)) {
      rest_ok = false;
      failed += std::string(" ") + name;
    }
  }
  const Check* c2 = find_check(r, "omega_within_rho_pm_5");
  const Check* mvs = find_check(r, "mean_value_sum_within_5_log_rho");
  const Check* lap = find_check(r, "harmonic_in_omega");
  Outcome o;
  o.pass = sign_ok && rest_ok && strict_fail == 0;
  o.known_reason = rest_ok && !sign_ok && other_fail == 0 && diagonal_zero == strict_fail;
  const Check* hp = find_check(r, "h_pole_in_[1,2]");
  o.detail = std::to_string(poles) + " poles; H(zeta) in [" + fmt("%.4f", hp ? hp->value : -1) + ", " +
             fmt("%.4f", hp ? hp->limit : -1) + "]; max |Laplacian| " + fmt("%.1e", lap ? lap->value : -1) +
             "; sandwich C2 " + fmt("%.3f", c2 ? c2->value : -1) + " (limit 5); max |mean value sum| / ln rho " +
             fmt("%.3f", mvs ? mvs->value : -1) + " (limit 5); strict sign fails at " + std::to_string(strict_fail) +
             " poles, " + std::to_string(diagonal_zero) + " of them diagonal with H(zeta+1) = 0 exactly; " +
             fmt("%.1f", secs) + " s" + (failed.empty() ? "" : "; failed:" + failed);
  return o;
}

Outcome a5_exit_times() {
  const auto t0 = Clock::now();
  int grid = 0, violations = 0;
  double tightest = 1e300;
  for (int ia = 1; ia <= 14; ++ia)
    for (int ib = ia; ib <= 14; ++ib)
      for (int il = 1; il <= 20; ++il) {
        const double a = ia / 10.0, b = ib / 10.0, lambda = il / 10.0;
        if (std::sqrt(lambda) * (a + b) > 3.0) continue;
        ++grid;
        const double exact = exit_mgf_exact(a, b, lambda), bound = exit_mgf_bound(a, b, lambda);
        if (!(exact <= bound)) ++violations;
        tightest = std::min(tightest, bound - exact);
      }

  const McEstimate mc = mc_exit_mgf(0.5, 0.5, 1.0, kMgfPaths, derive_seed(kSeed, 5, 1));
  const double rel = std::abs(mc.mean - kMgfTarget) / kMgfTarget;

  const std::pair<double, double> points[] = {{0.5, 1.0}, {1.0, 1.0}, {2.0, 1.0}, {0.5, 4.0}, {1.0, 2.0}, {3.0, 1.0}};
  int tail_bad = 0;
  std::string tails;
  std::uint64_t idx = 0;
  for (auto [k, s] : points) {
    const McEstimate e = mc_sup_tail(k, s, kTailPaths, kTailSteps, derive_seed(kSeed, 5, 100 + idx++));
    const double bound = bm_sup_tail(k, s);
    if (!(e.mean <= bound + 3.0 * e.std_error)) ++tail_bad;
    tails += " (" + fmt("%g", k) + "," + fmt("%g", s) + "):" + fmt("%.4f", e.mean) + "<=" + fmt("%.4f", bound);
  }
  const double secs = seconds_since(t0);
  const bool ok = violations == 0 && rel <= kMgfRelative && tail_bad == 0 && secs < kA5Seconds;
  return {ok, std::to_string(grid) + " grid points, " + std::to_string(violations) + " bound violations (min slack " +
                  fmt("%.3f", tightest) + "); MC MGF " + fmt("%.5f", mc.mean) + " +- " + fmt("%.5f", mc.std_error) +
                  ", rel err " + fmt("%.2e", rel) + " (limit 1e-2); sup tails" + tails + "; " + fmt("%.1f", secs) +
                  " s"};
}

Outcome a6_martingale() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.command = "martingale";
  cfg.zeta = {{10, 0}, {20, 12}, {0, 40}};
  cfg.seeds = kA6Seeds;
  cfg.seed = kSeed;
  cfg.out = scratch("a6");
  const CommandResult r = cmd_martingale(cfg);
  const double secs = seconds_since(t0);
  double drift = 0.0, qv = 0.0;
  std::string failed;
  for (const Check& c : r.checks) {
    if (c.name.rfind("zero_drift", 0) == 0) drift = std::max(drift, c.value);
    if (c.name.rfind("qv_log_growth", 0) == 0) qv = std::max(qv, c.value);
    if (!c.pass) failed += " " + c.name;
  }
  const bool ok = r.pass() && secs < kA6Seconds;
  return {ok, "3 poles x " + std::to_string(kA6Seeds) + " seeds; max |mean M| / SE " + fmt("%.3f", drift) +
                  " (limit 3); frozen identity and conservation exact; max mean S / ln t " + fmt("%.4f", qv) +
                  " (limit 50); " + fmt("%.1f", secs) + " s" + (failed.empty() ? "" : "; failed:" + failed)};
}

Outcome a7_towers() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.command = "tower";
  cfg.sites_file = fs::path(IDLA_FIXTURE_DIR) / "shells_figure.txt";
  cfg.center = {12, 0};
  cfg.shell_m = 12;
  cfg.c_prime = 0.5;
  cfg.d = 2;
  cfg.expect_beta = {5, 3, 2, 3};
  cfg.out = scratch("a7");
  const CommandResult r = cmd_tower(cfg);

  ShellProfile p{{12, 0}, 12, {4, 1, 2, 2, 2, 1, 2, 1, 1, 1, 3, 3, 1}};
  const TowerDecomposition t = tower_decompose(p, 0.5, 2);
  const std::vector<std::uint64_t> b_expected = {5, 5, 5, 5, 5, 3, 3, 3, 2, 2, 3, 3, 3};
  const bool figure = r.pass() && t.beta == std::vector<int>{5, 3, 2, 3} && t.b == b_expected;

  // m = 2: all compositions of 3
  std::uint64_t brute = UINT64_MAX;
  for (const std::vector<int>& beta :
       {std::vector<int>{3}, std::vector<int>{2, 1}, std::vector<int>{1, 2}, std::vector<int>{1, 1, 1}})
    brute = std::min(brute, tower_energy(beta));
  const std::uint64_t e2 = min_tower_energy(2).energy;

  double floor_min = 1e300;
  int floor_at = 0;
  for (int m = 10; m <= 40; ++m) {
    const double v = double(min_tower_energy(m).energy) * std::log(double(m)) / double(m * m);
    if (v < floor_min) {
      floor_min = v;
      floor_at = m;
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = figure && e2 == 6 && brute == 6 && floor_min >= kEnergyFloor && secs < kA7Seconds;
  return {ok, std::string("figure beta (5,3,2,3) and b-sequence ") + (figure ? "reproduced" : "NOT reproduced") +
                  "; min E(m=2) " + std::to_string(e2) + " (enumeration " + std::to_string(brute) +
                  "); min over m in [10,40] of E ln m / m^2 = " + fmt("%.4f", floor_min) + " at m=" +
                  std::to_string(floor_at) + " (floor 0.3); " + fmt("%.2f", secs) + " s"};
}

std::vector<GrowthHistory> planted_histories() {
  std::vector<GrowthHistory> out;
  // packed disk
  std::vector<LatticePoint> pts;
  for (int y = -30; y <= 30; ++y)
    for (int x = -30; x <= 30; ++x) pts.push_back({x, y});
  std::stable_sort(pts.begin(), pts.end(), [](LatticePoint a, LatticePoint b) { return norm2(a) < norm2(b); });
  std::vector<LatticePoint> disk;
  for (LatticePoint z : pts)
    if (norm2(z) < 25 * 25) disk.push_back(z);
  out.push_back(GrowthHistory::from_order(disk));
  // straight path: every far site is early
  std::vector<LatticePoint> path;
  for (int x = 0; x < 60; ++x) path.push_back({x, 0});
  out.push_back(GrowthHistory::from_order(path));
  // disk with a late site: (3,0) withheld until particle 200, its outward neighbour via (4,1)
  std::vector<LatticePoint> late;
  std::set<LatticePoint> in;
  auto adjacent = [&](LatticePoint z) {
    for (Direction d : kDirections)
      if (in.count(z + step(d))) return true;
    return false;
  };
  late.push_back({0, 0});
  in.insert({0, 0});
  while (late.size() < 400) {
    if (late.size() == 199) {
      late.push_back({3, 0});
      in.insert({3, 0});
      continue;
    }
    for (LatticePoint z : pts) {
      if (z == LatticePoint{3, 0} || in.count(z) || !adjacent(z)) continue;
      late.push_back(z);
      in.insert(z);
      break;
    }
  }
  out.push_back(GrowthHistory::from_order(late));
  // early arm grafted onto a small disk
  std::vector<LatticePoint> arm;
  for (LatticePoint z : pts)
    if (norm2(z) < 36) arm.push_back(z);
  for (int x = 6; x < 20; ++x) arm.push_back({x, 0});
  out.push_back(GrowthHistory::from_order(arm));
  return out;
}

Outcome a8_events() {
  const auto t0 = Clock::now();
  const double params[] = {0.5, 1.0, 2.0, 4.0};
  std::vector<int> bad(kComplementHistories, 0);
  parallel_for(kComplementHistories, default_threads(), [&](std::size_t i) {
    const GrowthHistory h = idla_grow(kComplementSize, derive_seed(kSeed, 8, i));
    for (double m : params)
      for (double ell : params) bad[i] += !event_complement_check(h, m, ell, h.size());
  });
  int simulated_bad = 0;
  for (int b : bad) simulated_bad += b;

  int planted_bad = 0, planted_checks = 0;
  for (const GrowthHistory& h : planted_histories())
    for (double m : params)
      for (double ell : params)
        for (std::uint64_t N : {h.size() / 3, h.size() / 2, h.size()}) {
          ++planted_checks;
          planted_bad += !event_complement_check(h, m, ell, N);
        }

  // Tentacles. One scan at the widest b; narrower thresholds are subsets.
  const double bs[] = {0.05, kTentacleB, 0.2};
  std::vector<std::array<std::uint64_t, 3>> flags(kTentacleTrials);
  std::vector<std::uint64_t> sites(kTentacleTrials);
  parallel_for(kTentacleTrials, default_threads(), [&](std::size_t i) {
    const GrowthHistory h = idla_grow(kTentacleSize, derive_seed(kSeed, 9, i));
    for (LatticePoint z : tentacle_scan(h, kTentacleSize, bs[2], kTentacleM)) {
      const double occ = double(ball_occupancy(h, kTentacleSize, z, kTentacleM));
      for (int k = 0; k < 3; ++k)
        if (occ <= bs[k] * kTentacleM * kTentacleM) ++flags[i][std::size_t(k)];
    }
    sites[i] = h.size();
  });
  std::uint64_t totals[3] = {0, 0, 0}, scanned = 0;
  for (std::size_t i = 0; i < kTentacleTrials; ++i) {
    for (int k = 0; k < 3; ++k) totals[k] += flags[i][std::size_t(k)];
    scanned += sites[i];
  }
  const double secs = seconds_since(t0);
  const bool ok = simulated_bad == 0 && planted_bad == 0 && totals[1] == 0 && secs < kA8Seconds;
  std::string rates;
  for (int k = 0; k < 3; ++k)
    rates += " b=" + fmt("%g", bs[k]) + ":" + std::to_string(totals[k]) + "/" + std::to_string(scanned);
  return {ok, std::to_string(kComplementHistories) + " simulated histories x 16 (m, ell), " +
                  std::to_string(simulated_bad) + " disagreements; " + std::to_string(planted_checks) +
                  " planted checks, " + std::to_string(planted_bad) + " disagreements; tentacle flags (m=20)" + rates +
                  "; " + fmt("%.1f", secs) + " s"};
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    files[fs::relative(e.path(), root).generic_string()] = os.str();
  }
  return files;
}

Outcome a9_reproducibility() {
  std::vector<ExperimentConfig> runs;
  ExperimentConfig base;
  base.seed = kSeed;

  ExperimentConfig sim = base;
  sim.command = "simulate";
  sim.sizes = {2000, 5000};
  sim.trials = 6;
  runs.push_back(sim);
  ExperimentConfig kern = base;
  kern.command = "kernel";
  kern.kernel_radius = 48;
  runs.push_back(kern);
  ExperimentConfig harm = base;
  harm.command = "harmonic";
  harm.radii = {10, 30};
  harm.directions = 8;
  runs.push_back(harm);
  ExperimentConfig mart = base;
  mart.command = "martingale";
  mart.zeta = {{10, 0}, {7, 9}};
  mart.seeds = 100;
  runs.push_back(mart);
  ExperimentConfig tower = base;
  tower.command = "tower";
  runs.push_back(tower);

  std::size_t files = 0, mismatched = 0;
  for (const ExperimentConfig& run : runs) {
    std::vector<std::map<std::string, std::string>> trees;
    for (unsigned threads : {1U, 8U, 8U}) {
      ExperimentConfig c = run;
      c.threads = threads;
      c.out = scratch("a9_" + run.command + "_" + std::to_string(trees.size()));
      run_command(c);
      if (run.command == "simulate") {
        ExperimentConfig an = c;
        an.command = "analyze";
        run_command(an);
      }
      trees.push_back(read_tree(c.out));
    }
    files += trees[0].size();
    for (std::size_t k = 1; k < trees.size(); ++k) {
      if (trees[k].size() != trees[0].size()) ++mismatched;
      for (const auto& [name, bytes] : trees[0]) {
        const auto it = trees[k].find(name);
        if (it == trees[k].end() || it->second != bytes) ++mismatched;
      }
    }
  }

  const McEstimate m1 = mc_exit_mgf(0.5, 0.5, 1.0, 50'000, 3, 1), m8 = mc_exit_mgf(0.5, 0.5, 1.0, 50'000, 3, 8);
  const McEstimate s1 = mc_sup_tail(1.0, 1.0, 50'000, 512, 3, 1), s8 = mc_sup_tail(1.0, 1.0, 50'000, 512, 3, 8);
  const bool mc_same = m1.mean == m8.mean && m1.std_error == m8.std_error && s1.mean == s8.mean;
  const bool ok = mismatched == 0 && mc_same && files > 0;
  return {ok, std::to_string(files) + " files from 6 commands compared across 1, 8, 8 threads; " +
                  std::to_string(mismatched) + " mismatches; Monte Carlo estimates " +
                  (mc_same ? "bit-identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1", a1_kernel_exactness}, {"A2", a2_asymptotics}, {"A3", a3_fluctuations},
      {"A4", a4_harmonic},         {"A5", a5_exit_times},  {"A6", a6_martingale},
      {"A7", a7_towers},           {"A8", a8_events},      {"A9", a9_reproducibility},
  };
  std::set<std::string> only(argv + 1, argv + argc);

  g_scratch = fs::temp_directory_path() / ("idla_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(g_scratch);

  const std::set<std::string> known = known_failures();
  int ran = 0, passed = 0, known_failed = 0, unexpected = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    ++ran;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what(), false};
    }
    const bool expect_fail = known.count(id) != 0;
    std::string tag;
    if (o.pass) {
      ++passed;
      if (expect_fail) {
        ++unexpected;
        tag = " [unexpected pass]";
      }
    } else if (expect_fail && o.known_reason) {
      ++known_failed;
      tag = " [known failure]";
    } else {
      ++unexpected;
    }
    std::printf("%s %s %s (%.1f s)%s\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0),
                tag.c_str());
    std::fflush(stdout);
  }
  std::printf("summary: %d/%d pass, %d known failure(s), %d unexpected\n", passed, ran, known_failed, unexpected);
  std::error_code ec;
  fs::remove_all(g_scratch, ec);
  return unexpected == 0 ? 0 : 1;
}
