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

#include <string>

#include "doctest.h"
#include "ngo/config.hpp"
#include "ngo/error.hpp"

using namespace ngo;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "cfg.ini");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfigError);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const ExperimentConfig c = parse_config("").config;
  CHECK(c.p == 0.6);
  CHECK(c.gamma == 0.05);
  CHECK(c.tolerance == 1e-8);
  CHECK(c.dirichlet_beta == 0.5);
  CHECK(c.algorithm == ExperimentAlgorithm::kNgo);
  CHECK_FALSE(c.offset.has_value());
  CHECK_FALSE(parse_config("").axis.has_value());
}

TEST_CASE("full config parses") {
  const std::string text = R"(# demo
[experiment]
algorithm = compressed_ngo
rounds = 250   # short
seed = 42
repeats = 3

[topology]
topology = erdos_renyi
n = 12
edge_probability = 0.3

[consensus]
p = 0.75
gamma = 0.02
comm = switching
switching = ring + complete
switch_period = 4
H = 2
couple_current_states = true

[objective]
objective = logistic
dim = 5
batch = 0
partition = dirichlet
dirichlet_beta = 0.1

[schedule]
a = 120
policy = warn

[compressor]
compressor = random_k
k = 2
)";
  const ExperimentConfig c = parse_config(text).config;
  CHECK(c.algorithm == ExperimentAlgorithm::kCompressedNgo);
  CHECK(c.rounds == 250);
  CHECK(c.seed == 42);
  CHECK(c.repeats == 3);
  CHECK(c.topology == TopologyKind::kErdosRenyi);
  CHECK(c.workers == 12);
  CHECK(c.edge_probability == 0.3);
  CHECK(c.p == 0.75);
  CHECK(c.comm == CommKind::kSwitching);
  CHECK(c.switching == std::vector<TopologyKind>{TopologyKind::kRing, TopologyKind::kComplete});
  CHECK(c.switch_period == 4);
  CHECK(c.period == 2);
  CHECK(c.couple_current_states);
  CHECK(c.objective == ObjectiveKind::kLogistic);
  CHECK(c.batch == 0);
  CHECK(c.partition == PartitionKind::kDirichlet);
  CHECK(c.dirichlet_beta == 0.1);
  CHECK(c.offset == 120.0);
  CHECK(c.policy == ConstraintPolicy::kWarn);
  CHECK(c.compressor == CompressorKind::kRandomK);
  CHECK(c.compressor_k == 2);

  SUBCASE("effective text round-trips") {
    const std::string echoed = to_config_text(c);
    CHECK(parse_config(echoed).config == c);
    CHECK(to_config_text(parse_config(echoed).config) == echoed);
  }
}

TEST_CASE("unknown key reports its line") {
  const std::string msg = config_error("[experiment]\nrounds = 5\n\n[topology]\ntopologyy = ring\n");
  CHECK(contains(msg, "cfg.ini:5:"));
  CHECK(contains(msg, "topologyy"));
}

TEST_CASE("strict parsing errors") {
  CHECK(contains(config_error("[nope]\n"), "cfg.ini:1: unknown section"));
  CHECK(contains(config_error("rounds = 3\n"), "before any section"));
  CHECK(contains(config_error("[experiment]\nrounds = many\n"), "cfg.ini:2: bad value"));
  CHECK(contains(config_error("[experiment]\nrounds = 3\nrounds = 4\n"), "duplicate"));
  CHECK(contains(config_error("[consensus]\np = 1.5\n"), "p must lie"));
  CHECK(contains(config_error("[consensus]\ncomm = gossipy\n"), "synchronous|delayed"));
  CHECK(contains(config_error("[experiment]\nrounds\n"), "expected 'key = value'"));
  CHECK(contains(config_error("[experiment]\nseed = 1, 2\n"), "cannot hold a list"));
  CHECK(contains(config_error("[consensus]\np = 0.5, 0.6\ngamma = 0.1, 0.2\n"),
                 "cfg.ini:3: only one list-valued key"));
  CHECK(contains(config_error("[consensus]\np = 0.5, 0.4\n"), "p must lie"));
}

TEST_CASE("sweep axes") {
  const ParsedConfig parsed = parse_config("[consensus]\nH = 1, 2, 5\n");
  REQUIRE(parsed.axis.has_value());
  CHECK(parsed.axis->key == "consensus.H");
  CHECK(parsed.axis->values == std::vector<std::string>{"1", "2", "5"});
  CHECK(with_axis_value(parsed.config, "consensus.H", "5").period == 5);
  for (const char* key : {"p", "gamma", "u"}) {
    const auto axis = parse_config(std::string("[consensus]\n") + key + " = 0.5, 0.6\n").axis;
    CHECK(axis.has_value());
  }
  CHECK(parse_config("[topology]\nn = 4, 16\n").axis->key == "topology.n");
  CHECK(parse_config("[topology]\ntopology = ring, complete\n").axis->values.size() == 2);
}

TEST_CASE("config hash") {
  ExperimentConfig a;
  ExperimentConfig b;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.gamma = 0.051;
  CHECK(config_hash(a) != config_hash(b));
}

}  // TEST_SUITE
