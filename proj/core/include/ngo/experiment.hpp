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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ngo/config.hpp"

namespace ngo {

struct SummaryRow {
  std::string config_hash;
  double final_gap_avg = 0.0;  // NaN for pure consensus
  // First round with V <= tolerance * V0 (pure consensus) or
  // loss_gap_avg <= tolerance (training); -1 when never reached.
  long long first_hit = -1;
  double bound_total = 0.0;  // NaN when no bound applies
  double wall_seconds = 0.0;
};

/// Executes one seeded run and writes trace.csv, summary.csv,
/// effective_config.ini and, for centralized / gossip / ngo, bound.csv
/// into out_dir.
SummaryRow run_experiment(const ExperimentConfig& config,
                          const std::filesystem::path& out_dir);

struct SweepRow {
  std::string value;
  SummaryRow summary;  // final_gap_avg averaged over repeats, first_hit max
};

/// One SummaryRow per axis value with seeds held fixed across values. Each
/// value/seed pair runs in its own sub-directory; up to max_threads run
/// concurrently. Writes out_dir/summary.csv.
std::vector<SweepRow> run_sweep(const ParsedConfig& parsed,
                                const std::filesystem::path& out_dir,
                                int max_threads);

struct SpectraReport {
  int n = 0;
  int max_degree = 0;
  double lambda2_w = 0.0;
  double lambda_n_w = 0.0;
  double lambda2_b = 0.0;
  double t_star = 0.0;  // NaN when p = 1 or lambda2_b = 0
  double delay_threshold = 0.0;
  double delay_threshold_unweighted = 0.0;
  bool connected = true;
};

/// Spectral quantities of the configured topology with Metropolis weights.
/// A disconnected topology reports lambda2 = 0 and connected = false.
SpectraReport compute_spectra(const ExperimentConfig& config, double v0);

void write_spectra(std::ostream& out, const SpectraReport& report, bool csv);

/// Builds the configured topology (reading edges_file for custom).
Topology make_topology(const ExperimentConfig& config);

/// Builds the configured training problem for one seed.
Problem make_problem(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace ngo
