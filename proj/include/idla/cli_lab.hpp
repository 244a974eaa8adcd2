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

// Experiment orchestration behind the idla-lab tool.
//
// Configuration is a flat list of `key = value` lines ('#' starts a comment);
// command-line flags override file values. Every command writes its reports
// into `out` and returns a list of named checks. Reports carry the build id
// and the resolved configuration: CSV files in a leading `# {json}` line, JSON
// files under a "provenance" key.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "idla/lattice.hpp"

namespace idla::cli {

struct ExperimentConfig {
  std::string command;

  std::uint64_t seed = 1;
  std::uint64_t trials = 10;
  std::vector<std::uint64_t> sizes = {10000};
  std::filesystem::path out = "out";  ///< not part of the recorded config
  unsigned threads = 0;  ///< 0 = all cores; not part of the recorded config

  // simulate / analyze
  double m = 4.0;
  double ell = 4.0;
  double b = 0.1;
  int tentacle_m = 20;
  std::filesystem::path snapshots;  ///< analyze input; empty = <out>/snapshots
  std::vector<double> m_grid = {2.0, 4.0, 8.0};
  std::vector<double> ell_grid = {2.0, 4.0, 8.0};

  // kernel / harmonic
  int kernel_radius = 0;  ///< 0 = 64 for kernel, sized to the radii for harmonic
  std::uint64_t samples = 500;
  std::vector<double> radii = {10.0, 20.0, 50.0};
  int directions = 16;

  // martingale
  std::vector<LatticePoint> zeta = {{30, 0}};
  std::uint64_t particles = 0;  ///< 0 = floor(pi (2 rho / 3)^2)
  std::uint64_t seeds = 1000;

  // tower
  std::vector<std::uint64_t> shells = {4, 1, 2, 2, 2, 1, 2, 1, 1, 1, 3, 3, 1};
  std::filesystem::path sites_file;  ///< `x y` lines; overrides shells
  LatticePoint center = {12, 0};
  int shell_m = 12;
  double c_prime = 0.5;
  int d = 2;
  std::vector<int> expect_beta;
};

/// git-describe style identifier baked in at configure time.
const char* build_id() noexcept;

/// Sets one key. Unknown keys and malformed values throw InvalidArgument.
void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Applies every `key = value` line of a file. Throws Io if unreadable.
void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);
void load_config_text(ExperimentConfig& cfg, const std::string& text);

/// Resolved configuration as compact JSON (keys sorted, threads and out omitted).
std::string config_json(const ExperimentConfig& cfg);
/// One `key = default` line per key, for --help.
std::string config_help();

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

struct CommandResult {
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;
  bool pass() const;
};

CommandResult cmd_simulate(const ExperimentConfig& cfg);
CommandResult cmd_analyze(const ExperimentConfig& cfg);
CommandResult cmd_kernel(const ExperimentConfig& cfg);
CommandResult cmd_harmonic(const ExperimentConfig& cfg);
CommandResult cmd_martingale(const ExperimentConfig& cfg);
CommandResult cmd_tower(const ExperimentConfig& cfg);

/// Dispatches on cfg.command. Throws InvalidArgument for an unknown command.
CommandResult run_command(const ExperimentConfig& cfg);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<double> residuals;
};
/// Ordinary least squares y = intercept + slope x. r2 = 1 when y is constant
/// and fitted exactly.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Quantile with linear interpolation between order statistics (q in [0, 1]).
double quantile(std::vector<double> values, double q);

/// Lattice point nearest to r e^{2 pi i j / count}.
LatticePoint direction_point(double r, int j, int count);

}  // namespace idla::cli
