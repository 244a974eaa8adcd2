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

// idla-lab: simulate|analyze|kernel|harmonic|martingale|tower
// Exit status 0 = every check passed, 1 = a check failed, 2 = usage or IO error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "idla/cli_lab.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitGate = 1;
constexpr int kExitUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  using idla::cli::ExperimentConfig;

  CLI::App app{"IDLA simulator and numerical verification toolkit"};
  app.footer("Config keys (flat `key = value` file, overridden by flags and --set):\n" + idla::cli::config_help());
  app.set_version_flag("--version", std::string(idla::cli::build_id()));
  app.require_subcommand(1, 1);

  std::string config_file;
  std::optional<std::uint64_t> seed, trials;
  std::optional<unsigned> threads;
  std::optional<std::string> sizes, out;
  std::vector<std::string> sets;

  const char* commands[][2] = {{"simulate", "grow clusters, write snapshots and per-trial statistics"},
                               {"analyze", "fit deviations across sizes from saved snapshots"},
                               {"kernel", "exactness and asymptotics of the potential kernel"},
                               {"harmonic", "properties of the harmonic detector and its region"},
                               {"martingale", "drift, frozen values and growth of the stopped martingale"},
                               {"tower", "shell profile and cube-tower decomposition"}};
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c[0], c[1]);
    sub->add_option("--config", config_file, "flat key = value config file");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--trials", trials, "trials per size");
    sub->add_option("--sizes", sizes, "comma-separated cluster sizes");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)");
    sub->add_option("--set", sets, "extra key=value override (repeatable)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  ExperimentConfig cfg;
  cfg.command = app.get_subcommands().front()->get_name();
  try {
    if (!config_file.empty()) idla::cli::load_config_file(cfg, config_file);
    if (seed) cfg.seed = *seed;
    if (trials) cfg.trials = *trials;
    if (threads) cfg.threads = *threads;
    if (sizes) idla::cli::apply_key(cfg, "sizes", *sizes);
    if (out) cfg.out = *out;
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
        return kExitUsage;
      }
      idla::cli::apply_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }

    const idla::cli::CommandResult result = idla::cli::run_command(cfg);
    for (const auto& c : result.checks)
      std::printf("%s %s value=%.17g limit=%.17g%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value, c.limit,
                  c.detail.empty() ? "" : " ", c.detail.c_str());
    for (const auto& f : result.files) std::printf("wrote %s\n", f.string().c_str());
    return result.pass() ? kExitPass : kExitGate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
