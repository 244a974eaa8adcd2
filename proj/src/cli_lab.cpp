// Copyright 2026 The idla-lab Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "idla/cli_lab.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "idla/event_detect.hpp"
#include "idla/format.hpp"
#include "idla/harmonic_field.hpp"
#include "idla/idla_engine.hpp"
#include "idla/martingale_lab.hpp"
#include "idla/parallel.hpp"
#include "idla/potential_kernel.hpp"
#include "idla/rng.hpp"

#ifndef IDLA_BUILD_ID
#define IDLA_BUILD_ID "unknown"
#endif

namespace idla::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* build_id() noexcept { return IDLA_BUILD_ID; }

bool CommandResult::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) out.push_back(trim(part));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::InvalidArgument, "bad value '" + value + "' for key '" + key + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v);
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec == std::errc() && res.ptr == v.data() + v.size()) return out;
  // scientific notation such as 1e5
  const double d = parse_double(key, v);
  if (d < 0.0 || d > 9.0e18 || d != std::floor(d)) bad_value(key, v);
  return static_cast<std::uint64_t>(d);
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

LatticePoint parse_point(const std::string& key, const std::string& v) {
  const auto parts = split(v, ',');
  if (parts.size() != 2) bad_value(key, v);
  return {parse_int(key, parts[0]), parse_int(key, parts[1])};
}

template <class T, class Fn>
std::vector<T> parse_list(const std::string& key, const std::string& v, char sep, Fn&& one) {
  std::vector<T> out;
  if (trim(v).empty()) return out;
  for (const std::string& p : split(v, sep)) out.push_back(one(key, p));
  return out;
}

std::string join_u64(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string join_double(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

std::string join_points(const std::vector<LatticePoint>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? ";" : "") + std::to_string(v[i].x) + "," + std::to_string(v[i].y);
  return s;
}

std::string join_int(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// key -> current value as text, in a fixed order
std::vector<std::pair<std::string, std::string>> config_items(const ExperimentConfig& c) {
  return {
      {"b", format_double(c.b)},
      {"c_prime", format_double(c.c_prime)},
      {"center", std::to_string(c.center.x) + "," + std::to_string(c.center.y)},
      {"d", std::to_string(c.d)},
      {"directions", std::to_string(c.directions)},
      {"ell", format_double(c.ell)},
      {"ell_grid", join_double(c.ell_grid)},
      {"expect_beta", join_int(c.expect_beta)},
      {"kernel_radius", std::to_string(c.kernel_radius)},
      {"m", format_double(c.m)},
      {"m_grid", join_double(c.m_grid)},
      {"out", c.out.generic_string()},
      {"particles", std::to_string(c.particles)},
      {"radii", join_double(c.radii)},
      {"samples", std::to_string(c.samples)},
      {"seed", std::to_string(c.seed)},
      {"seeds", std::to_string(c.seeds)},
      {"shell_m", std::to_string(c.shell_m)},
      {"shells", join_u64(c.shells)},
      {"sites_file", c.sites_file.generic_string()},
      {"sizes", join_u64(c.sizes)},
      {"snapshots", c.snapshots.generic_string()},
      {"tentacle_m", std::to_string(c.tentacle_m)},
      {"threads", std::to_string(c.threads)},
      {"trials", std::to_string(c.trials)},
      {"zeta", join_points(c.zeta)},
  };
}

}  // namespace

void apply_key(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  if (key == "seed") c.seed = parse_u64(key, v);
  else if (key == "trials") c.trials = parse_u64(key, v);
  else if (key == "sizes") c.sizes = parse_list<std::uint64_t>(key, v, ',', parse_u64);
  else if (key == "out") c.out = v;
  else if (key == "threads") c.threads = static_cast<unsigned>(parse_u64(key, v));
  else if (key == "m") c.m = parse_double(key, v);
  else if (key == "ell") c.ell = parse_double(key, v);
  else if (key == "b") c.b = parse_double(key, v);
  else if (key == "tentacle_m") c.tentacle_m = parse_int(key, v);
  else if (key == "snapshots") c.snapshots = v;
  else if (key == "m_grid") c.m_grid = parse_list<double>(key, v, ',', parse_double);
  else if (key == "ell_grid") c.ell_grid = parse_list<double>(key, v, ',', parse_double);
  else if (key == "kernel_radius") c.kernel_radius = parse_int(key, v);
  else if (key == "samples") c.samples = parse_u64(key, v);
  else if (key == "radii") c.radii = parse_list<double>(key, v, ',', parse_double);
  else if (key == "directions") c.directions = parse_int(key, v);
  else if (key == "zeta") c.zeta = parse_list<LatticePoint>(key, v, ';', parse_point);
  else if (key == "particles") c.particles = parse_u64(key, v);
  else if (key == "seeds") c.seeds = parse_u64(key, v);
  else if (key == "shells") c.shells = parse_list<std::uint64_t>(key, v, ',', parse_u64);
  else if (key == "sites_file") c.sites_file = v;
  else if (key == "center") c.center = parse_point(key, v);
  else if (key == "shell_m") c.shell_m = parse_int(key, v);
  else if (key == "c_prime") c.c_prime = parse_double(key, v);
  else if (key == "d") c.d = parse_int(key, v);
  else if (key == "expect_beta") c.expect_beta = parse_list<int>(key, v, ',', parse_int);
  else throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
}

void load_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidArgument, "line " + std::to_string(lineno) + ": expected key = value");
    apply_key(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

void load_config_file(ExperimentConfig& cfg, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  load_config_text(cfg, text.str());
}

std::string config_json(const ExperimentConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : config_items(cfg))
    if (k != "threads" && k != "out") j[k] = v;
  return j.dump();
}

std::string config_help() {
  std::string s;
  for (const auto& [k, v] : config_items(ExperimentConfig{})) s += "  " + k + " = " + v + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Statistics

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "fit needs >= 2 points");
  const double n = double(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::InvalidArgument, "fit needs distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.residuals.push_back(r);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * double(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - double(lo)) * (values[hi] - values[lo]);
}

LatticePoint direction_point(double r, int j, int count) {
  const double t = 2.0 * std::numbers::pi * double(j) / double(count);
  return {static_cast<std::int32_t>(std::lround(r * std::cos(t))),
          static_cast<std::int32_t>(std::lround(r * std::sin(t)))};
}

// ---------------------------------------------------------------------------
// Output

namespace {

/// Files land under `dir` through a temporary name and a rename. Unless
/// commit() is called, everything written is removed again.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const fs::path& p : written_) fs::remove(p, ec);
  }

  void write(const fs::path& rel, const std::string& bytes) {
    const fs::path target = dir_ / rel;
    const fs::path tmp = target.string() + ".tmp";
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create directory " + target.parent_path().string());
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
      out.write(bytes.data(), std::streamsize(bytes.size()));
      out.flush();
      if (!out) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::Io, "short write to " + tmp.string());
      }
    }
    fs::rename(tmp, target, ec);
    if (ec) {
      fs::remove(tmp, ec);
      throw Error(ErrorCode::Io, "cannot rename into " + target.string());
    }
    written_.push_back(target);
  }

  std::vector<fs::path> commit() {
    committed_ = true;
    return written_;
  }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  bool committed_ = false;
};

json provenance(const ExperimentConfig& cfg) {
  json p;
  p["build"] = build_id();
  p["command"] = cfg.command;
  p["config"] = json::parse(config_json(cfg));
  return p;
}

std::string csv_header_comment(const ExperimentConfig& cfg) { return "# " + provenance(cfg).dump() + "\n"; }

json checks_json(const std::vector<Check>& checks) {
  json a = json::array();
  for (const Check& c : checks) {
    json j;
    j["name"] = c.name;
    j["pass"] = c.pass;
    j["value"] = c.value;
    j["limit"] = c.limit;
    if (!c.detail.empty()) j["detail"] = c.detail;
    a.push_back(j);
  }
  return a;
}

std::string report_json(const ExperimentConfig& cfg, json body, const std::vector<Check>& checks) {
  json j;
  j["provenance"] = provenance(cfg);
  for (auto& [k, v] : body.items()) j[k] = v;
  j["checks"] = checks_json(checks);
  j["pass"] = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  return j.dump(2) + "\n";
}

unsigned resolve_threads(unsigned requested) { return requested == 0 ? default_threads() : requested; }

/// Caps the worker count so that `per_task` bytes per worker fit in half of
/// the physical memory.
unsigned memory_guard(unsigned threads, double per_task) {
  const long pages = sysconf(_SC_PHYS_PAGES);
  const long page = sysconf(_SC_PAGE_SIZE);
  if (pages <= 0 || page <= 0 || per_task <= 0.0) return threads;
  const double budget = 0.5 * double(pages) * double(page);
  const auto cap = static_cast<unsigned>(std::max(1.0, std::floor(budget / per_task)));
  return std::min(threads, cap);
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string s;
  bool first = true;
  for (const std::string& c : cells) {
    if (!first) s += ',';
    s += c;
    first = false;
  }
  return s + "\n";
}

int default_radius_for(double rho_max) { return static_cast<int>(std::ceil(2.0 * rho_max)) + 20; }

}  // namespace

// ---------------------------------------------------------------------------
// simulate

CommandResult cmd_simulate(const ExperimentConfig& cfg) {
  if (cfg.sizes.empty() || cfg.trials == 0) throw Error(ErrorCode::InvalidArgument, "need sizes and trials >= 1");
  for (std::uint64_t n : cfg.sizes)
    if (n == 0 || n > 50'000'000) throw Error(ErrorCode::InvalidArgument, "sizes must lie in [1, 5e7]");

  struct Task {
    std::uint64_t n, trial, seed;
  };
  std::vector<Task> tasks;
  for (std::uint64_t n : cfg.sizes)
    for (std::uint64_t t = 0; t < cfg.trials; ++t) tasks.push_back({n, t, derive_seed(cfg.seed, n, t)});

  struct Outcome {
    std::string row;
    std::string events;
    std::string snapshot;
    double dev_in = 0.0, dev_out = 0.0, r = 0.0;
  };

  std::uint64_t n_max = *std::max_element(cfg.sizes.begin(), cfg.sizes.end());
  const double side = 2.0 * growth_half_side(n_max) + 1.0;
  const unsigned threads = memory_guard(resolve_threads(cfg.threads), 16.0 * side * side);

  OutputSet out(cfg.out);
  std::string csv = csv_header_comment(cfg);
  csv += "n,trial,seed,inner_radius,outer_radius,deviation_in,deviation_out,max_abs_lateness,early,late,tentacles\n";
  std::string events = csv_header_comment(cfg);
  events += "trial_seed,n,kind,x,y,param,join_index\n";
  double min_dev = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  std::uint64_t nonpositive = 0, too_large = 0;

  const std::size_t batch = std::size_t(threads) * 2;
  for (std::size_t start = 0; start < tasks.size(); start += batch) {
    const std::size_t count = std::min(batch, tasks.size() - start);
    std::vector<Outcome> results(count);
    parallel_for(count, threads, [&](std::size_t i) {
      const Task& task = tasks[start + i];
      const GrowthHistory h = idla_grow(task.n, task.seed);
      const double r = std::sqrt(double(task.n) / std::numbers::pi);
      const double inner = inner_radius(h, task.n);
      const double outer = outer_radius(h, task.n);
      double max_l = 0.0;
      for (const LatenessEntry& e : lateness_field(h)) max_l = std::max(max_l, std::abs(e.lateness));
      const auto early_sites = detect_early(h, cfg.m, task.n);
      const auto late_sites = detect_late(h, cfg.ell, task.n);
      const auto tentacle_sites = tentacle_scan(h, task.n, cfg.b, cfg.tentacle_m);
      const auto early = early_sites.size(), late = late_sites.size(), tentacles = tentacle_sites.size();
      Outcome& o = results[i];
      const std::string prefix = std::to_string(task.seed) + "," + std::to_string(task.n) + ",";
      for (const JoinedSite& e : early_sites)
        o.events += prefix + "early," + std::to_string(e.site.x) + "," + std::to_string(e.site.y) + "," +
                    format_double(cfg.m) + "," + std::to_string(e.join) + "\n";
      for (LatticePoint z : late_sites)
        o.events += prefix + "late," + std::to_string(z.x) + "," + std::to_string(z.y) + "," + format_double(cfg.ell) +
                    "," + std::to_string(h.join(z)) + "\n";
      for (LatticePoint z : tentacle_sites)
        o.events += prefix + "tentacle," + std::to_string(z.x) + "," + std::to_string(z.y) + "," +
                    format_double(cfg.b) + "," + std::to_string(h.join(z)) + "\n";
      o.r = r;
      o.dev_in = r - inner;
      o.dev_out = outer - r;
      o.row = csv_row({std::to_string(task.n), std::to_string(task.trial), std::to_string(task.seed),
                       format_double(inner), format_double(outer), format_double(o.dev_in), format_double(o.dev_out),
                       format_double(max_l), std::to_string(early), std::to_string(late), std::to_string(tentacles)});
      std::ostringstream snap(std::ios::binary);
      write_snapshot(snap, h);
      o.snapshot = snap.str();
    });
    for (std::size_t i = 0; i < count; ++i) {
      const Task& task = tasks[start + i];
      const Outcome& o = results[i];
      char name[64];
      std::snprintf(name, sizeof(name), "n%llu_t%04llu.idla", static_cast<unsigned long long>(task.n),
                    static_cast<unsigned long long>(task.trial));
      out.write(fs::path("snapshots") / name, o.snapshot);
      csv += o.row;
      events += o.events;
      min_dev = std::min({min_dev, o.dev_in, o.dev_out});
      max_ratio = std::max({max_ratio, o.dev_in / o.r, o.dev_out / o.r});
      nonpositive += (o.dev_in <= 0.0 || o.dev_out <= 0.0);
      too_large += (o.dev_in >= o.r || o.dev_out >= o.r);
    }
  }

  CommandResult res;
  res.checks.push_back({"deviations_positive", nonpositive == 0, min_dev, 0.0,
                        std::to_string(nonpositive) + " trials with a nonpositive deviation"});
  res.checks.push_back({"deviations_below_radius", too_large == 0, max_ratio, 1.0, "max deviation / r"});
  out.write("simulate.csv", csv);
  out.write("events.csv", events);
  json body;
  body["trials"] = cfg.trials;
  body["sizes"] = cfg.sizes;
  out.write("simulate.json", report_json(cfg, body, res.checks));
  res.files = out.commit();
  return res;
}

// ---------------------------------------------------------------------------
// analyze

CommandResult cmd_analyze(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.snapshots.empty() ? cfg.out / "snapshots" : cfg.snapshots;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::Io, "snapshot directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".idla") files.push_back(entry.path());
  if (ec) throw Error(ErrorCode::Io, "cannot list " + dir.string());
  if (files.empty()) throw Error(ErrorCode::Io, "no .idla snapshots in " + dir.string());
  std::sort(files.begin(), files.end());

  struct Row {
    std::uint64_t n = 0, seed = 0;
    double inner = 0.0, outer = 0.0, dev_in = 0.0, dev_out = 0.0;
    std::vector<std::uint64_t> early, late;
  };
  std::vector<Row> rows(files.size());
  parallel_for(files.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    std::ifstream in(files[i], std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + files[i].string());
    GrowthHistory h;
    try {
      h = read_snapshot(in);
    } catch (const Error& e) {
      throw Error(e.code(), files[i].string() + ": " + e.what());
    }
    Row& r = rows[i];
    r.n = h.size();
    r.seed = h.seed();
    const double rad = std::sqrt(double(r.n) / std::numbers::pi);
    r.inner = inner_radius(h, r.n);
    r.outer = outer_radius(h, r.n);
    r.dev_in = rad - r.inner;
    r.dev_out = r.outer - rad;
    for (double m : cfg.m_grid) r.early.push_back(detect_early(h, m, r.n).size());
    for (double l : cfg.ell_grid) r.late.push_back(detect_late(h, l, r.n).size());
  });

  std::string csv = csv_header_comment(cfg);
  csv += "file,n,seed,inner_radius,outer_radius,deviation_in,deviation_out,max_deviation\n";
  std::map<std::uint64_t, std::vector<std::size_t>> by_size;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    csv += csv_row({files[i].filename().string(), std::to_string(r.n), std::to_string(r.seed), format_double(r.inner),
                    format_double(r.outer), format_double(r.dev_in), format_double(r.dev_out),
                    format_double(std::max(r.dev_in, r.dev_out))});
    by_size[r.n].push_back(i);
  }

  CommandResult res;
  json per_size = json::array();
  std::vector<double> log_r, cube_r, means;
  bool bound_ok = true;
  double worst_ratio = 0.0;
  for (const auto& [n, idx] : by_size) {
    const double r = std::sqrt(double(n) / std::numbers::pi);
    std::vector<double> dev;
    for (std::size_t i : idx) dev.push_back(std::max(rows[i].dev_in, rows[i].dev_out));
    double mean = 0.0;
    for (double v : dev) mean += v;
    mean /= double(dev.size());
    json s;
    s["n"] = n;
    s["r"] = r;
    s["trials"] = idx.size();
    s["mean_max_deviation"] = mean;
    s["quantiles"] = {{"min", quantile(dev, 0.0)},
                      {"q25", quantile(dev, 0.25)},
                      {"median", quantile(dev, 0.5)},
                      {"q75", quantile(dev, 0.75)},
                      {"max", quantile(dev, 1.0)}};
    json events = json::array();
    for (std::size_t k = 0; k < cfg.m_grid.size(); ++k) {
      double total = 0.0;
      for (std::size_t i : idx) total += double(rows[i].early[k]);
      events.push_back({{"kind", "early"}, {"m", cfg.m_grid[k]}, {"mean_count", total / double(idx.size())}});
    }
    for (std::size_t k = 0; k < cfg.ell_grid.size(); ++k) {
      double total = 0.0;
      for (std::size_t i : idx) total += double(rows[i].late[k]);
      events.push_back({{"kind", "late"}, {"ell", cfg.ell_grid[k]}, {"mean_count", total / double(idx.size())}});
    }
    s["events"] = events;
    per_size.push_back(s);
    const double limit = 4.0 * std::log(r);
    if (!(mean <= limit)) bound_ok = false;
    worst_ratio = std::max(worst_ratio, mean / limit);
    log_r.push_back(std::log(r));
    cube_r.push_back(std::cbrt(r));
    means.push_back(mean);
  }
  res.checks.push_back({"mean_deviation_within_4_log_r", bound_ok, worst_ratio, 1.0,
                        "max over sizes of mean max-deviation / (4 ln r)"});

  json body;
  body["per_size"] = per_size;
  auto fit_json = [](const LinearFit& f) {
    return json{{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"residuals", f.residuals}};
  };
  if (means.size() >= 2) {
    const LinearFit lf = fit_line(log_r, means);
    const LinearFit cf = fit_line(cube_r, means);
    body["fit_log_r"] = fit_json(lf);
    body["fit_cbrt_r"] = fit_json(cf);
    body["slope"] = lf.slope;
    body["intercept"] = lf.intercept;
    body["r2"] = lf.r2;
    if (means.size() >= 3)
      res.checks.push_back({"log_fit_beats_cbrt_fit", lf.r2 > cf.r2, lf.r2, cf.r2, "r2 of log fit vs r^(1/3) fit"});
  }

  OutputSet out(cfg.out);
  out.write("analyze.csv", csv);
  out.write("analyze.json", report_json(cfg, body, res.checks));
  res.files = out.commit();
  return res;
}

// ---------------------------------------------------------------------------
// kernel

CommandResult cmd_kernel(const ExperimentConfig& cfg) {
  const int R0 = cfg.kernel_radius > 0 ? cfg.kernel_radius : 64;
  const KernelTable table = build_kernel_table(R0);
  CommandResult res;
  const mpq_class zero(0), one(1);

  auto exact_check = [&](const char* name, LatticePoint z, const mpq_class& p, const mpq_class& q) {
    const KernelValue v = table.exact(z);
    res.checks.push_back({name, v.p == p && v.q == q, v.to_double(), KernelValue{p, q}.to_double(), "exact p + q/pi"});
  };
  exact_check("g(1,0)=1", {1, 0}, one, zero);
  exact_check("g(1,1)=4/pi", {1, 1}, zero, mpq_class(4));
  if (R0 >= 2) exact_check("g(2,0)=4-8/pi", {2, 0}, mpq_class(4), mpq_class(-8));

  const KernelValue lap0 = table.laplacian_exact({0, 0});
  res.checks.push_back({"laplacian_origin_is_1", lap0.p == one && lap0.q == zero, lap0.to_double(), 1.0, ""});

  RngStream rng(cfg.seed, 0);
  std::uint64_t bad = 0;
  for (std::uint64_t s = 0; s < cfg.samples; ++s) {
    LatticePoint z;
    do {
      z = {std::int32_t(rng.below(std::uint64_t(2 * R0 - 1))) - (R0 - 1),
           std::int32_t(rng.below(std::uint64_t(2 * R0 - 1))) - (R0 - 1)};
    } while (z == LatticePoint{0, 0});
    const KernelValue lap = table.laplacian_exact(z);
    bad += !(lap.p == zero && lap.q == zero);
  }
  res.checks.push_back({"laplacian_zero_off_origin", bad == 0, double(bad), 0.0,
                        std::to_string(cfg.samples) + " sampled points"});

  double worst = 0.0;
  for_each_in_ball(double(R0) + 1e-9, [&](LatticePoint z) {
    const double r = norm(z);
    if (r < 10.0 || r > double(R0)) return;
    const double dev = table(z) - (2.0 / std::numbers::pi) * std::log(r) - table.lambda_hat();
    worst = std::max(worst, r * r * std::abs(dev));
  });
  res.checks.push_back({"asymptotic_residual_r2", worst <= 1.0, worst, 1.0, "max |z|^2 |g - (2/pi) ln|z| - lambda|"});

  const auto g = [&](LatticePoint z) { return table(z); };
  const LambdaFit inner = fit_lambda_ring(g, R0 / 2.0, 3.0 * R0 / 4.0);
  const LambdaFit outer = fit_lambda_ring(g, 3.0 * R0 / 4.0, double(R0));
  const double spread = std::abs(inner.lambda - outer.lambda);
  res.checks.push_back({"lambda_ring_stability", spread <= 1e-4, spread, 1e-4, ""});

  json body;
  body["radius"] = R0;
  body["lambda_hat"] = table.lambda_hat();
  body["lambda_exact"] = (2.0 * std::numbers::egamma + std::log(8.0)) / std::numbers::pi;
  body["lambda_rings"] = {inner.lambda, outer.lambda};
  OutputSet out(cfg.out);
  std::ostringstream dump;
  table.dump(dump);
  out.write("kernel_table.txt", dump.str());
  out.write("kernel.json", report_json(cfg, body, res.checks));
  res.files = out.commit();
  return res;
}

// ---------------------------------------------------------------------------
// harmonic

namespace {

struct PoleReport {
  LatticePoint zeta;
  double rho = 0.0, h_pole = 0.0, h_plus1 = 0.0, h_plus1i = 0.0;
  double max_laplacian = 0.0, inner_gap = 0.0, outer_gap = 0.0;
  std::array<double, 4> mvs{};
};

PoleReport inspect_pole(LatticePoint zeta, const KernelTable& table) {
  PoleReport p;
  const HarmonicPole pole = make_pole(zeta);
  const auto ex = exceptional_points(pole);
  p.zeta = zeta;
  p.rho = pole.rho;
  p.h_pole = h_zeta(pole, table, ex[0]);
  p.h_plus1 = h_zeta(pole, table, ex[1]);
  p.h_plus1i = h_zeta(pole, table, ex[2]);
  const OmegaRegion region = build_omega(pole, table);
  double far = 0.0;
  for (LatticePoint z : region.inside()) {
    far = std::max(far, norm(z));
    if (z == ex[0] || z == ex[1] || z == ex[2]) continue;
    p.max_laplacian = std::max(p.max_laplacian, std::abs(h_laplacian(pole, table, z)));
  }
  p.outer_gap = far - p.rho;
  const auto box = static_cast<std::int32_t>(std::ceil(p.rho)) + 8;
  double near = std::numeric_limits<double>::infinity();
  for (std::int32_t y = -box; y <= box; ++y)
    for (std::int32_t x = -box; x <= box; ++x)
      if (!region.contains({x, y})) near = std::min(near, norm({x, y}));
  p.inner_gap = p.rho - near;
  const double fr[4] = {0.25, 0.5, 0.75, 1.0};
  for (int k = 0; k < 4; ++k) p.mvs[std::size_t(k)] = mean_value_sum(pole, table, fr[k] * p.rho);
  return p;
}

}  // namespace

CommandResult cmd_harmonic(const ExperimentConfig& cfg) {
  if (cfg.radii.empty() || cfg.directions < 1) throw Error(ErrorCode::InvalidArgument, "need radii and directions");
  std::vector<LatticePoint> zetas;
  for (double r : cfg.radii)
    for (int j = 0; j < cfg.directions; ++j) zetas.push_back(direction_point(r, j, cfg.directions));
  double rho_max = 0.0;
  for (LatticePoint z : zetas) rho_max = std::max(rho_max, norm(z));
  const KernelTable table = build_kernel_table(cfg.kernel_radius > 0 ? cfg.kernel_radius : default_radius_for(rho_max));

  std::vector<PoleReport> reports(zetas.size());
  parallel_for(zetas.size(), resolve_threads(cfg.threads),
               [&](std::size_t i) { reports[i] = inspect_pole(zetas[i], table); });

  std::string csv = csv_header_comment(cfg);
  csv += "x,y,rho,h_pole,h_plus_1,h_plus_1_plus_i,max_laplacian,inner_gap,outer_gap,mvs_q1,mvs_q2,mvs_q3,mvs_q4\n";
  double h_lo = 1e300, h_hi = -1e300, sign_worst = -1e300, lap_worst = 0.0, c2 = -1e300, mvs_ratio = 0.0;
  std::size_t sign_bad = 0, sign_bad_diagonal = 0;
  for (const PoleReport& p : reports) {
    csv += csv_row({std::to_string(p.zeta.x), std::to_string(p.zeta.y), format_double(p.rho), format_double(p.h_pole),
                    format_double(p.h_plus1), format_double(p.h_plus1i), format_double(p.max_laplacian),
                    format_double(p.inner_gap), format_double(p.outer_gap), format_double(p.mvs[0]),
                    format_double(p.mvs[1]), format_double(p.mvs[2]), format_double(p.mvs[3])});
    h_lo = std::min(h_lo, p.h_pole);
    h_hi = std::max(h_hi, p.h_pole);
    sign_worst = std::max({sign_worst, p.h_plus1, p.h_plus1i});
    if (!(p.h_plus1 < 0.0 && p.h_plus1i < 0.0)) {
      ++sign_bad;
      sign_bad_diagonal += std::abs(p.zeta.x) == std::abs(p.zeta.y);
    }
    lap_worst = std::max(lap_worst, p.max_laplacian);
    c2 = std::max({c2, p.inner_gap, p.outer_gap});
    for (double v : p.mvs) mvs_ratio = std::max(mvs_ratio, std::abs(v) / std::log(p.rho));
  }

  CommandResult res;
  res.checks.push_back({"h_pole_in_[1,2]", h_lo >= 1.0 && h_hi <= 2.0, h_lo, h_hi, "min and max of H(zeta)"});
  res.checks.push_back({"h_negative_next_to_pole", sign_bad == 0, sign_worst, 0.0,
                        std::to_string(sign_bad) + " poles fail (" + std::to_string(sign_bad_diagonal) +
                            " on a diagonal, where H(zeta+1) = 0)"});
  res.checks.push_back({"harmonic_in_omega", lap_worst < 1e-10, lap_worst, 1e-10, ""});
  res.checks.push_back({"omega_within_rho_pm_5", c2 <= 5.0, c2, 5.0, "empirical sandwich constant"});
  res.checks.push_back({"mean_value_sum_within_5_log_rho", mvs_ratio <= 5.0, mvs_ratio, 5.0, "max |sum| / ln rho"});

  json body;
  body["poles"] = zetas.size();
  body["kernel_radius"] = table.radius_exact();
  body["sandwich_constant"] = c2;
  OutputSet out(cfg.out);
  out.write("harmonic.csv", csv);
  out.write("harmonic.json", report_json(cfg, body, res.checks));
  res.files = out.commit();
  return res;
}

// ---------------------------------------------------------------------------
// martingale

CommandResult cmd_martingale(const ExperimentConfig& cfg) {
  if (cfg.zeta.empty() || cfg.seeds < 2) throw Error(ErrorCode::InvalidArgument, "need a pole and seeds >= 2");
  double rho_max = 0.0;
  for (LatticePoint z : cfg.zeta) rho_max = std::max(rho_max, norm(z));
  const KernelTable table = build_kernel_table(cfg.kernel_radius > 0 ? cfg.kernel_radius : default_radius_for(rho_max));

  CommandResult res;
  OutputSet out(cfg.out);
  json poles = json::array();
  for (LatticePoint zeta : cfg.zeta) {
    const HarmonicPole pole = make_pole(zeta);
    auto region = std::make_shared<const OmegaRegion>(build_omega(pole, table));
    const std::uint64_t n = cfg.particles > 0
                                ? cfg.particles
                                : static_cast<std::uint64_t>(std::floor(std::numbers::pi * std::pow(2.0 * pole.rho / 3.0, 2)));
    std::vector<std::uint64_t> checkpoints;
    for (std::uint64_t q = 1; q <= 4; ++q) {
      const std::uint64_t t = n * q / 4;
      if (t >= 1 && (checkpoints.empty() || checkpoints.back() != t)) checkpoints.push_back(t);
    }
    const std::uint64_t master =
        derive_seed(cfg.seed, (std::uint64_t(std::uint32_t(zeta.x)) << 32) | std::uint32_t(zeta.y));
    const MartingaleEnsemble e = martingale_ensemble(region, n, checkpoints, cfg.seeds, master, cfg.threads);

    const std::string tag = "(" + std::to_string(zeta.x) + "," + std::to_string(zeta.y) + ")";
    double drift = 0.0, qv = 0.0;
    json cps = json::array();
    for (const EnsembleCheckpoint& c : e.checkpoints) {
      drift = std::max(drift, c.se_m > 0.0 ? std::abs(c.mean_m) / c.se_m : (c.mean_m == 0.0 ? 0.0 : 1e300));
      if (c.t >= 2) qv = std::max(qv, c.mean_s / std::log(double(c.t)));
      cps.push_back({{"t", c.t}, {"mean_M", c.mean_m}, {"se_M", c.se_m}, {"mean_S", c.mean_s}});
    }
    double interp = 0.0;
    for (const Crossing& c : region->crossings())
      if (!c.puncture) interp = std::max(interp, std::abs(h_zeta(pole, table, c.point()) - region->level()));

    res.checks.push_back({"zero_drift " + tag, drift <= 3.0, drift, 3.0, "max |mean M| / standard error"});
    res.checks.push_back({"frozen_value " + tag, e.max_frozen_error <= 1e-12 && interp <= 1e-12,
                          std::max(e.max_frozen_error, interp), 1e-12, "frozen increments and H at crossings"});
    res.checks.push_back({"conservation " + tag, e.conserved, double(e.settled + e.frozen + e.pole_hits),
                          double(n * cfg.seeds), "settled + frozen + pole = launched"});
    res.checks.push_back({"qv_log_growth " + tag, qv <= 50.0, qv, 50.0, "max mean S(t) / ln t"});

    poles.push_back({{"zeta", {zeta.x, zeta.y}},
                     {"rho", pole.rho},
                     {"particles", n},
                     {"seeds", cfg.seeds},
                     {"checkpoints", cps},
                     {"settled", e.settled},
                     {"frozen", e.frozen},
                     {"pole_hits", e.pole_hits}});

    const MartingaleTrace trace = martingale_trace(region, n, derive_seed(master, 0));
    std::ostringstream trace_csv;
    trace_csv << csv_header_comment(cfg);
    write_trace_csv(trace_csv, trace);
    out.write("martingale_trace_" + std::to_string(zeta.x) + "_" + std::to_string(zeta.y) + ".csv", trace_csv.str());
  }
  json body;
  body["poles"] = poles;
  out.write("martingale.json", report_json(cfg, body, res.checks));
  res.files = out.commit();
  return res;
}

// ---------------------------------------------------------------------------
// tower

CommandResult cmd_tower(const ExperimentConfig& cfg) {
  ShellProfile profile;
  if (!cfg.sites_file.empty()) {
    std::ifstream in(cfg.sites_file);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + cfg.sites_file.string());
    std::vector<LatticePoint> sites;
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::istringstream row(line);
      LatticePoint z;
      if (!(row >> z.x)) continue;
      if (!(row >> z.y)) throw Error(ErrorCode::Format, "bad site line in " + cfg.sites_file.string());
      sites.push_back(z);
    }
    profile = shell_profile(sites, cfg.center, cfg.shell_m);
  } else {
    if (cfg.shells.empty()) throw Error(ErrorCode::InvalidArgument, "need shells or sites_file");
    profile.m = static_cast<int>(cfg.shells.size()) - 1;
    profile.a = cfg.shells;
  }
  const TowerDecomposition t = tower_decompose(profile, cfg.c_prime, cfg.d);
  const std::uint64_t energy = tower_energy(t);

  CommandResult res;
  res.checks.push_back({"window_condition", tower_window_holds(t, profile.a), double(t.beta.size()), 0.0,
                        "all blocks except the last"});
  json body;
  body["a"] = profile.a;
  body["beta"] = t.beta;
  body["alpha"] = t.alpha;
  body["b"] = t.b;
  body["energy"] = energy;
  body["last_unconstrained"] = t.last_unconstrained;
  if (profile.m <= kMaxExhaustiveTower) {
    const MinTower best = min_tower_energy(profile.m, cfg.d);
    body["min_energy"] = best.energy;
    body["min_beta"] = best.beta;
    res.checks.push_back({"energy_at_least_minimum", energy >= best.energy, double(energy), double(best.energy), ""});
  }
  if (!cfg.expect_beta.empty())
    res.checks.push_back({"expected_beta", t.beta == cfg.expect_beta, double(t.beta.size()),
                          double(cfg.expect_beta.size()), join_int(t.beta)});
  OutputSet out(cfg.out);
  out.write("tower.json", report_json(cfg, body, res.checks));
  res.files = out.commit();
  return res;
}

CommandResult run_command(const ExperimentConfig& cfg) {
  if (cfg.command == "simulate") return cmd_simulate(cfg);
  if (cfg.command == "analyze") return cmd_analyze(cfg);
  if (cfg.command == "kernel") return cmd_kernel(cfg);
  if (cfg.command == "harmonic") return cmd_harmonic(cfg);
  if (cfg.command == "martingale") return cmd_martingale(cfg);
  if (cfg.command == "tower") return cmd_tower(cfg);
  throw Error(ErrorCode::InvalidArgument, "unknown command '" + cfg.command + "'");
}

}  // namespace idla::cli
