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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ngo/diagnostics.hpp"
#include "ngo/error.hpp"
#include "ngo/experiment.hpp"

using namespace ngo;
namespace fs = std::filesystem;

namespace {

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name)
      : path(fs::temp_directory_path() / ("ngo_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> column(const fs::path& csv, int col) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c <= col; ++c) std::getline(ss, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("runs are reproducible and echo their config") {
  ScratchDir dir("repro");
  ExperimentConfig c;
  c.rounds = 300;
  c.seed = 5;
  run_experiment(c, dir.path / "a");
  run_experiment(c, dir.path / "b");
  CHECK(slurp(dir.path / "a" / "trace.csv") == slurp(dir.path / "b" / "trace.csv"));
  CHECK(fs::exists(dir.path / "a" / "bound.csv"));
  CHECK(fs::exists(dir.path / "a" / "summary.csv"));

  const ParsedConfig echoed = load_config((dir.path / "a" / "effective_config.ini").string());
  CHECK(echoed.config == c);
  run_experiment(echoed.config, dir.path / "c");
  CHECK(slurp(dir.path / "a" / "trace.csv") == slurp(dir.path / "c" / "trace.csv"));

  c.seed = 6;
  run_experiment(c, dir.path / "d");
  CHECK(slurp(dir.path / "a" / "trace.csv") != slurp(dir.path / "d" / "trace.csv"));
}

TEST_CASE("every algorithm runs from a config") {
  ScratchDir dir("algorithms");
  for (auto alg : {ExperimentAlgorithm::kCentralized, ExperimentAlgorithm::kGossip,
                   ExperimentAlgorithm::kNgo, ExperimentAlgorithm::kLocalSgd,
                   ExperimentAlgorithm::kCompressedNgo, ExperimentAlgorithm::kPureConsensus}) {
    ExperimentConfig c;
    c.algorithm = alg;
    c.rounds = 200;
    c.dim = 3;
    c.period = 2;
    c.compressor_k = 2;
    const SummaryRow row = run_experiment(c, dir.path / to_string(alg));
    CHECK(row.config_hash == config_hash(c));
    if (alg == ExperimentAlgorithm::kPureConsensus) {
      CHECK(std::isnan(row.final_gap_avg));
    } else {
      CHECK(row.final_gap_avg >= -1e-9);
    }
    const bool bounded = alg == ExperimentAlgorithm::kCentralized ||
                         alg == ExperimentAlgorithm::kGossip || alg == ExperimentAlgorithm::kNgo;
    CHECK(fs::exists(dir.path / to_string(alg) / "bound.csv") == bounded);
  }
}

TEST_CASE("pure consensus trace decreases to the tolerance") {
  ScratchDir dir("pure");
  ExperimentConfig c;
  c.algorithm = ExperimentAlgorithm::kPureConsensus;
  c.rounds = 400;
  const SummaryRow row = run_experiment(c, dir.path);
  REQUIRE(row.first_hit > 0);
  const auto v = column(dir.path / "trace.csv", 1);
  for (long long t = 1; t <= row.first_hit; ++t) CHECK(v[t] <= v[t - 1]);
  CHECK(v[row.first_hit] <= c.tolerance * v[0]);
  for (std::size_t t = row.first_hit; t < v.size(); ++t) CHECK(v[t] <= c.tolerance * v[0]);
}

TEST_CASE("sweep over p orders first hitting times") {
  ScratchDir dir("sweep_p");
  ParsedConfig parsed = parse_config(
      "[experiment]\nalgorithm = pure_consensus\nrounds = 2500\n[consensus]\np = 0.5, 0.6, 0.8, 1.0\n");
  const auto rows = run_sweep(parsed, dir.path, 4);
  REQUIRE(rows.size() == 4);
  for (std::size_t k = 0; k < rows.size(); ++k) CHECK(rows[k].summary.first_hit > 0);
  for (std::size_t k = 1; k < rows.size(); ++k)
    CHECK(rows[k].summary.first_hit >= rows[k - 1].summary.first_hit);
  CHECK(fs::exists(dir.path / "summary.csv"));
  CHECK(fs::exists(dir.path / "p=0.5" / "seed_1" / "trace.csv"));
}

TEST_CASE("sweep over gamma: linear first hit does not increase") {
  ScratchDir dir("sweep_gamma");
  ParsedConfig parsed = parse_config(
      "[experiment]\nalgorithm = pure_consensus\nrounds = 3000\n"
      "[consensus]\np = 1\ngamma = 0.05, 0.1, 0.2, 0.4\n");
  const auto rows = run_sweep(parsed, dir.path, 2);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].summary.first_hit > 0);
    CHECK(rows[k].summary.first_hit <= rows[k - 1].summary.first_hit);
  }
}

TEST_CASE("sweep over H: final gap grows with the period") {
  ScratchDir dir("sweep_h");
  ParsedConfig parsed = parse_config(
      "[experiment]\nalgorithm = local_sgd\nrounds = 2000\nrepeats = 10\n"
      "[consensus]\nH = 1, 2, 5\n[objective]\nheterogeneity = 1.0\n");
  const auto rows = run_sweep(parsed, dir.path, 8);
  CHECK(rows[0].summary.final_gap_avg < rows[1].summary.final_gap_avg);
  CHECK(rows[1].summary.final_gap_avg < rows[2].summary.final_gap_avg);
}

TEST_CASE("sweep over u: more edges do not hurt") {
  ScratchDir dir("sweep_u");
  ParsedConfig parsed = parse_config(
      "[experiment]\nalgorithm = ngo\nrounds = 1000\nrepeats = 20\n"
      "[consensus]\ncomm = random\nu = 0.2, 0.4, 0.8\n[topology]\ntopology = complete\n");
  const auto rows = run_sweep(parsed, dir.path, 8);
  CHECK(rows[1].summary.final_gap_avg <= rows[0].summary.final_gap_avg);
  CHECK(rows[2].summary.final_gap_avg <= rows[1].summary.final_gap_avg);
}

TEST_CASE("sweep results do not depend on the thread count") {
  ScratchDir dir("threads");
  ParsedConfig parsed = parse_config(
      "[experiment]\nrounds = 300\nrepeats = 3\n[consensus]\ngamma = 0.02, 0.05, 0.1\n");
  const auto one = run_sweep(parsed, dir.path / "t1", 1);
  const auto many = run_sweep(parsed, dir.path / "t6", 6);
  REQUIRE(one.size() == many.size());
  for (std::size_t k = 0; k < one.size(); ++k) {
    CHECK(one[k].summary.final_gap_avg == many[k].summary.final_gap_avg);
    CHECK(one[k].summary.first_hit == many[k].summary.first_hit);
    CHECK(one[k].summary.config_hash == many[k].summary.config_hash);
  }
  const fs::path rel = fs::path("gamma=0.05") / "seed_2" / "trace.csv";
  CHECK(slurp(dir.path / "t1" / rel) == slurp(dir.path / "t6" / rel));
}

TEST_CASE("sweep needs a list") {
  ScratchDir dir("nolist");
  try {
    run_sweep(parse_config(""), dir.path, 1);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfigError);
  }
}

TEST_CASE("spectra") {
  ExperimentConfig c;
  c.workers = 4;
  SpectraReport ring4 = compute_spectra(c, 1.0);
  CHECK(ring4.lambda2_w == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(ring4.lambda_n_w == doctest::Approx(4.0 / 3).epsilon(1e-12));
  c.p = 0.5;
  c.gamma = 1.0;
  ring4 = compute_spectra(c, 1.0);
  CHECK(ring4.lambda2_b == doctest::Approx(2.0 / 9).epsilon(1e-12));
  CHECK(ring4.t_star == doctest::Approx(1.0607).epsilon(1e-4));
  c.topology = TopologyKind::kComplete;
  CHECK(compute_spectra(c, 1.0).lambda2_w == doctest::Approx(1.0).epsilon(1e-12));
  c.topology = TopologyKind::kRing;
  c.workers = 16;
  CHECK(compute_spectra(c, 1.0).lambda2_w < ring4.lambda2_w);

  std::ostringstream csv;
  write_spectra(csv, ring4, true);
  CHECK(csv.str().rfind("n,max_degree,lambda2_w", 0) == 0);
}

TEST_CASE("disconnected custom topology reports lambda2 = 0") {
  ScratchDir dir("custom");
  const fs::path edges = dir.path / "edges.txt";
  {
    std::ofstream out(edges);
    out << "n 4\n0 1\n2 3\n";
  }
  ExperimentConfig c;
  c.topology = TopologyKind::kCustom;
  c.workers = 4;
  c.edges_file = edges.string();
  int warnings = 0;
  const auto previous = set_warning_handler([&](const std::string&) { ++warnings; });
  const SpectraReport r = compute_spectra(c, 1.0);
  set_warning_handler(previous);
  CHECK_FALSE(r.connected);
  CHECK(r.lambda2_w == 0.0);
  CHECK(warnings == 1);
}

}  // TEST_SUITE
