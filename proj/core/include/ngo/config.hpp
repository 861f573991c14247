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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ngo/compress.hpp"
#include "ngo/graph.hpp"
#include "ngo/objective.hpp"
#include "ngo/optimize.hpp"
#include "ngo/partition.hpp"

namespace ngo {

enum class ExperimentAlgorithm {
  kCentralized,
  kGossip,
  kNgo,
  kLocalSgd,
  kCompressedNgo,
  kPureConsensus,
};

enum class CommKind { kSynchronous, kDelayed, kRandom, kSwitching };
enum class PartitionKind { kIid, kShards, kDirichlet };

/// Fully resolved experiment description. Every field has a default, so the
/// effective configuration is always complete and can be echoed back.
struct ExperimentConfig {
  // [experiment]
  ExperimentAlgorithm algorithm = ExperimentAlgorithm::kNgo;
  int rounds = 1000;
  std::uint64_t seed = 1;
  int repeats = 1;
  double tolerance = 1e-8;

  // [topology]
  TopologyKind topology = TopologyKind::kRing;
  int workers = 10;
  double edge_probability = 0.5;
  std::string edges_file;

  // [consensus]
  double p = 0.6;
  double gamma = 0.05;
  CommKind comm = CommKind::kSynchronous;
  int tau = 0;
  double u = 0.4;
  std::vector<TopologyKind> switching;
  int switch_period = 1;
  int period = 1;  // H
  bool couple_current_states = false;
  int state_dim = 1;  // pure consensus only

  // [objective]
  ObjectiveKind objective = ObjectiveKind::kQuadratic;
  int dim = 1;
  int samples = 50;
  int batch = 1;  // 0 is full batch
  double heterogeneity = 1.0;
  double noise = 0.5;
  double regularization = 1e-2;
  std::string dataset;
  PartitionKind partition = PartitionKind::kIid;
  int shards_per_worker = 2;
  double dirichlet_beta = 0.5;

  // [schedule]
  std::optional<double> offset;  // nullopt means the smallest admissible a
  ConstraintPolicy policy = ConstraintPolicy::kRefuse;

  // [compressor]
  CompressorKind compressor = CompressorKind::kTopK;
  int compressor_k = 1;

  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

/// A key whose value was a comma-separated list.
struct SweepAxis {
  std::string key;  // "section.key"
  std::vector<std::string> values;
};

struct ParsedConfig {
  ExperimentConfig config;
  std::optional<SweepAxis> axis;
};

/// Parses the sectioned key = value format. Unknown sections or keys, bad
/// values and more than one list-valued key throw Error(kConfigError) with
/// "<source>:<line>: ..." in the message. Only p, gamma, u, H, n and
/// topology may hold a list.
ParsedConfig parse_config(const std::string& text,
                          const std::string& source = "<config>");
ParsedConfig load_config(const std::string& path);

/// Applies one value of a sweep axis to a copy of the config.
ExperimentConfig with_axis_value(const ExperimentConfig& config,
                                 const std::string& key,
                                 const std::string& value);

/// Effective configuration text with every key present; parse_config of the
/// result reproduces the config.
std::string to_config_text(const ExperimentConfig& config);

/// FNV-1a of the effective configuration text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

std::string to_string(ExperimentAlgorithm algorithm);
std::string to_string(TopologyKind kind);

}  // namespace ngo
