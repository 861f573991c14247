// Copyright 2026 The ngosim Authors. All Rights Reserved.
//
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
// =============================================================================

// ngo_sim: run, sweep and spectra subcommands over an experiment config.
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "ngo/config.hpp"
#include "ngo/error.hpp"
#include "ngo/experiment.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

int thread_cap() {
  if (const char* env = std::getenv("NGO_SIM_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "ignoring NGO_SIM_THREADS='" << env << "'\n";
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

ngo::ParsedConfig load(const std::string& path, const CLI::Option* seed_opt,
                       std::uint64_t seed) {
  ngo::ParsedConfig parsed = ngo::load_config(path);
  if (seed_opt->count() > 0) parsed.config.seed = seed;
  return parsed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear gossip decentralized SGD simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool csv = false;
  double v0 = 1.0;

  auto* run = app.add_subcommand("run", "Execute one configured experiment");
  auto* sweep = app.add_subcommand("sweep", "Run a config with one list-valued key");
  auto* spectra = app.add_subcommand("spectra", "Print spectral quantities of a topology");
  CLI::Option* seed_opts[3];
  int slot = 0;
  for (auto* sub : {run, sweep, spectra}) {
    sub->add_option("--config", config_path, "Experiment config file")->required();
    seed_opts[slot++] = sub->add_option("--seed", seed, "Override the config seed");
  }
  for (auto* sub : {run, sweep}) {
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
  }
  spectra->add_flag("--csv", csv, "Machine-readable output");
  spectra->add_option("--v0", v0, "Initial disagreement V0 for T*")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (run->parsed()) {
      const auto parsed = load(config_path, seed_opts[0], seed);
      if (parsed.axis) {
        throw ngo::Error(ngo::ErrorCode::kConfigError,
                         "'" + parsed.axis->key + "' holds a list; use the sweep subcommand");
      }
      const auto row = ngo::run_experiment(parsed.config, out_dir);
      std::cout << "config_hash = " << row.config_hash << "\n"
                << "final_gap_avg = " << row.final_gap_avg << "\n"
                << "first_hit = " << row.first_hit << "\n"
                << "bound_total = " << row.bound_total << "\n"
                << "wall_seconds = " << row.wall_seconds << "\n";
    } else if (sweep->parsed()) {
      const auto parsed = load(config_path, seed_opts[1], seed);
      const auto rows = ngo::run_sweep(parsed, out_dir, thread_cap());
      std::cout << parsed.axis->key << ",final_gap_avg,first_hit\n";
      for (const auto& r : rows) {
        std::cout << r.value << "," << r.summary.final_gap_avg << ","
                  << r.summary.first_hit << "\n";
      }
    } else {
      const auto parsed = load(config_path, seed_opts[2], seed);
      ngo::write_spectra(std::cout, ngo::compute_spectra(parsed.config, v0), csv);
    }
  } catch (const ngo::Error& e) {
    std::cerr << "ngo_sim: " << e.what() << "\n";
    return e.code() == ngo::ErrorCode::kConfigError ? kConfigExit : kRuntimeExit;
  } catch (const std::exception& e) {
    std::cerr << "ngo_sim: " << e.what() << "\n";
    return kRuntimeExit;
  }
  return 0;
}
