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

#include "ngo/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "format.hpp"
#include "ngo/error.hpp"

namespace ngo {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Thrown by the value parsers; the caller adds source and line.
struct BadValue {
  std::string message;
};

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw BadValue{"bad value '" + text + "' for " + key};
  }
  return value;
}

double parse_real(const std::string& key, const std::string& text) {
  return parse_number<double>(key, text);
}

int parse_int(const std::string& key, const std::string& text) {
  return parse_number<int>(key, text);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw BadValue{"bad value '" + text + "' for " + key + " (true|false)"};
}

template <typename E>
E parse_enum(const std::string& key, const std::string& text,
             std::initializer_list<std::pair<const char*, E>> choices) {
  std::string names;
  for (const auto& [name, value] : choices) {
    if (text == name) return value;
    names += names.empty() ? "" : "|";
    names += name;
  }
  throw BadValue{"bad value '" + text + "' for " + key + " (" + names + ")"};
}

TopologyKind parse_topology(const std::string& key, const std::string& text) {
  return parse_enum<TopologyKind>(key, text,
                                  {{"ring", TopologyKind::kRing},
                                   {"complete", TopologyKind::kComplete},
                                   {"erdos_renyi", TopologyKind::kErdosRenyi},
                                   {"custom", TopologyKind::kCustom}});
}

void require(bool ok, const std::string& message) {
  if (!ok) throw BadValue{message};
}

using Setter = void (*)(ExperimentConfig&, const std::string&);

struct KeyInfo {
  Setter set;
  bool sweepable = false;
};

const std::map<std::string, KeyInfo>& key_table() {
  static const std::map<std::string, KeyInfo> table = {
      {"experiment.algorithm",
       {[](ExperimentConfig& c, const std::string& v) {
          c.algorithm = parse_enum<ExperimentAlgorithm>(
              "algorithm", v,
              {{"centralized", ExperimentAlgorithm::kCentralized},
               {"gossip", ExperimentAlgorithm::kGossip},
               {"ngo", ExperimentAlgorithm::kNgo},
               {"local_sgd", ExperimentAlgorithm::kLocalSgd},
               {"compressed_ngo", ExperimentAlgorithm::kCompressedNgo},
               {"pure_consensus", ExperimentAlgorithm::kPureConsensus}});
        }}},
      {"experiment.rounds",
       {[](ExperimentConfig& c, const std::string& v) {
          c.rounds = parse_int("rounds", v);
          require(c.rounds >= 1, "rounds must be >= 1");
        }}},
      {"experiment.seed",
       {[](ExperimentConfig& c, const std::string& v) {
          c.seed = parse_number<std::uint64_t>("seed", v);
        }}},
      {"experiment.repeats",
       {[](ExperimentConfig& c, const std::string& v) {
          c.repeats = parse_int("repeats", v);
          require(c.repeats >= 1, "repeats must be >= 1");
        }}},
      {"experiment.tolerance",
       {[](ExperimentConfig& c, const std::string& v) {
          c.tolerance = parse_real("tolerance", v);
          require(c.tolerance > 0.0, "tolerance must be > 0");
        }}},
      {"topology.topology",
       {[](ExperimentConfig& c, const std::string& v) {
          c.topology = parse_topology("topology", v);
        },
        true}},
      {"topology.n",
       {[](ExperimentConfig& c, const std::string& v) {
          c.workers = parse_int("n", v);
          require(c.workers >= 1, "n must be >= 1");
        },
        true}},
      {"topology.edge_probability",
       {[](ExperimentConfig& c, const std::string& v) {
          c.edge_probability = parse_real("edge_probability", v);
          require(c.edge_probability > 0.0 && c.edge_probability <= 1.0,
                  "edge_probability must be in (0,1]");
        }}},
      {"topology.edges_file",
       {[](ExperimentConfig& c, const std::string& v) { c.edges_file = v; }}},
      {"consensus.p",
       {[](ExperimentConfig& c, const std::string& v) {
          c.p = parse_real("p", v);
          require(c.p >= 0.5 && c.p <= 1.0, "p must lie in [0.5, 1]");
        },
        true}},
      {"consensus.gamma",
       {[](ExperimentConfig& c, const std::string& v) {
          c.gamma = parse_real("gamma", v);
          require(c.gamma >= 0.0, "gamma must be >= 0");
        },
        true}},
      {"consensus.comm",
       {[](ExperimentConfig& c, const std::string& v) {
          c.comm = parse_enum<CommKind>("comm", v,
                                        {{"synchronous", CommKind::kSynchronous},
                                         {"delayed", CommKind::kDelayed},
                                         {"random", CommKind::kRandom},
                                         {"switching", CommKind::kSwitching}});
        }}},
      {"consensus.tau",
       {[](ExperimentConfig& c, const std::string& v) {
          c.tau = parse_int("tau", v);
          require(c.tau >= 0, "tau must be >= 0");
        }}},
      {"consensus.u",
       {[](ExperimentConfig& c, const std::string& v) {
          c.u = parse_real("u", v);
          require(c.u > 0.0 && c.u <= 1.0, "u must be in (0,1]");
        },
        true}},
      {"consensus.switching",
       {[](ExperimentConfig& c, const std::string& v) {
          c.switching.clear();
          std::stringstream ss(v);
          std::string item;
          while (std::getline(ss, item, '+')) {
            c.switching.push_back(parse_topology("switching", trim(item)));
          }
          require(!c.switching.empty(), "switching needs at least one topology");
        }}},
      {"consensus.switch_period",
       {[](ExperimentConfig& c, const std::string& v) {
          c.switch_period = parse_int("switch_period", v);
          require(c.switch_period >= 1, "switch_period must be >= 1");
        }}},
      {"consensus.H",
       {[](ExperimentConfig& c, const std::string& v) {
          c.period = parse_int("H", v);
          require(c.period >= 1, "H must be >= 1");
        },
        true}},
      {"consensus.couple_current_states",
       {[](ExperimentConfig& c, const std::string& v) {
          c.couple_current_states = parse_bool("couple_current_states", v);
        }}},
      {"consensus.state_dim",
       {[](ExperimentConfig& c, const std::string& v) {
          c.state_dim = parse_int("state_dim", v);
          require(c.state_dim >= 1, "state_dim must be >= 1");
        }}},
      {"objective.objective",
       {[](ExperimentConfig& c, const std::string& v) {
          c.objective = parse_enum<ObjectiveKind>(
              "objective", v,
              {{"quadratic", ObjectiveKind::kQuadratic},
               {"logistic", ObjectiveKind::kLogistic}});
        }}},
      {"objective.dim",
       {[](ExperimentConfig& c, const std::string& v) {
          c.dim = parse_int("dim", v);
          require(c.dim >= 1, "dim must be >= 1");
        }}},
      {"objective.samples",
       {[](ExperimentConfig& c, const std::string& v) {
          c.samples = parse_int("samples", v);
          require(c.samples >= 1, "samples must be >= 1");
        }}},
      {"objective.batch",
       {[](ExperimentConfig& c, const std::string& v) {
          c.batch = parse_int("batch", v);
          require(c.batch >= 0, "batch must be >= 0");
        }}},
      {"objective.heterogeneity",
       {[](ExperimentConfig& c, const std::string& v) {
          c.heterogeneity = parse_real("heterogeneity", v);
          require(c.heterogeneity >= 0.0, "heterogeneity must be >= 0");
        }}},
      {"objective.noise",
       {[](ExperimentConfig& c, const std::string& v) {
          c.noise = parse_real("noise", v);
          require(c.noise >= 0.0, "noise must be >= 0");
        }}},
      {"objective.regularization",
       {[](ExperimentConfig& c, const std::string& v) {
          c.regularization = parse_real("regularization", v);
          require(c.regularization >= 0.0, "regularization must be >= 0");
        }}},
      {"objective.dataset",
       {[](ExperimentConfig& c, const std::string& v) { c.dataset = v; }}},
      {"objective.partition",
       {[](ExperimentConfig& c, const std::string& v) {
          c.partition = parse_enum<PartitionKind>(
              "partition", v,
              {{"iid", PartitionKind::kIid},
               {"shards", PartitionKind::kShards},
               {"dirichlet", PartitionKind::kDirichlet}});
        }}},
      {"objective.shards_per_worker",
       {[](ExperimentConfig& c, const std::string& v) {
          c.shards_per_worker = parse_int("shards_per_worker", v);
          require(c.shards_per_worker >= 1, "shards_per_worker must be >= 1");
        }}},
      {"objective.dirichlet_beta",
       {[](ExperimentConfig& c, const std::string& v) {
          c.dirichlet_beta = parse_real("dirichlet_beta", v);
          require(c.dirichlet_beta > 0.0, "dirichlet_beta must be > 0");
        }}},
      {"schedule.a",
       {[](ExperimentConfig& c, const std::string& v) {
          if (v == "auto") {
            c.offset.reset();
            return;
          }
          c.offset = parse_real("a", v);
          require(*c.offset > 0.0, "a must be > 0 or auto");
        }}},
      {"schedule.policy",
       {[](ExperimentConfig& c, const std::string& v) {
          c.policy = parse_enum<ConstraintPolicy>(
              "policy", v,
              {{"refuse", ConstraintPolicy::kRefuse}, {"warn", ConstraintPolicy::kWarn}});
        }}},
      {"compressor.compressor",
       {[](ExperimentConfig& c, const std::string& v) {
          c.compressor = parse_enum<CompressorKind>(
              "compressor", v,
              {{"top_k", CompressorKind::kTopK},
               {"random_k", CompressorKind::kRandomK},
               {"identity", CompressorKind::kIdentity}});
        }}},
      {"compressor.k",
       {[](ExperimentConfig& c, const std::string& v) {
          c.compressor_k = parse_int("k", v);
          require(c.compressor_k >= 0, "k must be >= 0");
        }}},
  };
  return table;
}

bool known_section(const std::string& s) {
  static const std::set<std::string> sections = {
      "experiment", "topology", "consensus", "objective", "schedule", "compressor"};
  return sections.contains(s);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

using detail::format_real;

}  // namespace

std::string to_string(ExperimentAlgorithm algorithm) {
  switch (algorithm) {
    case ExperimentAlgorithm::kCentralized: return "centralized";
    case ExperimentAlgorithm::kGossip: return "gossip";
    case ExperimentAlgorithm::kNgo: return "ngo";
    case ExperimentAlgorithm::kLocalSgd: return "local_sgd";
    case ExperimentAlgorithm::kCompressedNgo: return "compressed_ngo";
    case ExperimentAlgorithm::kPureConsensus: return "pure_consensus";
  }
  return "?";
}

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::kRing: return "ring";
    case TopologyKind::kComplete: return "complete";
    case TopologyKind::kErdosRenyi: return "erdos_renyi";
    case TopologyKind::kCustom: return "custom";
  }
  return "?";
}

ParsedConfig parse_config(const std::string& text, const std::string& source) {
  ParsedConfig parsed;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  const auto fail = [&](const std::string& message) {
    throw Error(ErrorCode::kConfigError,
                source + ":" + std::to_string(line_no) + ": " + message);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!known_section(section)) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) fail("key '" + key + "' appears before any section");
    const std::string full = section + "." + key;
    const auto it = key_table().find(full);
    if (it == key_table().end()) fail("unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(full).second) fail("duplicate key '" + key + "'");
    if (value.empty()) fail("missing value for '" + key + "'");
    try {
      if (value.find(',') != std::string::npos) {
        if (!it->second.sweepable) fail("key '" + key + "' cannot hold a list");
        if (parsed.axis) {
          fail("only one list-valued key is allowed (already sweeping " +
               parsed.axis->key + ")");
        }
        SweepAxis axis{full, split_list(value)};
        for (const auto& v : axis.values) {
          if (v.empty()) fail("empty entry in list for '" + key + "'");
          ExperimentConfig probe = parsed.config;
          it->second.set(probe, v);
        }
        it->second.set(parsed.config, axis.values.front());
        parsed.axis = std::move(axis);
      } else {
        it->second.set(parsed.config, value);
      }
    } catch (const BadValue& bad) {
      fail(bad.message);
    }
  }
  return parsed;
}

ParsedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

ExperimentConfig with_axis_value(const ExperimentConfig& config,
                                 const std::string& key,
                                 const std::string& value) {
  const auto it = key_table().find(key);
  if (it == key_table().end()) {
    throw Error(ErrorCode::kConfigError, "unknown sweep key '" + key + "'");
  }
  ExperimentConfig out = config;
  try {
    it->second.set(out, value);
  } catch (const BadValue& bad) {
    throw Error(ErrorCode::kConfigError, bad.message);
  }
  return out;
}

std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream out;
  const auto policy = c.policy == ConstraintPolicy::kRefuse ? "refuse" : "warn";
  const char* comm[] = {"synchronous", "delayed", "random", "switching"};
  const char* partition[] = {"iid", "shards", "dirichlet"};
  const char* compressor[] = {"top_k", "random_k", "identity"};
  std::string switching;
  for (auto kind : c.switching) {
    switching += (switching.empty() ? "" : "+") + to_string(kind);
  }

  out << "[experiment]\n"
      << "algorithm = " << to_string(c.algorithm) << "\n"
      << "rounds = " << c.rounds << "\n"
      << "seed = " << c.seed << "\n"
      << "repeats = " << c.repeats << "\n"
      << "tolerance = " << format_real(c.tolerance) << "\n\n"
      << "[topology]\n"
      << "topology = " << to_string(c.topology) << "\n"
      << "n = " << c.workers << "\n"
      << "edge_probability = " << format_real(c.edge_probability) << "\n";
  if (!c.edges_file.empty()) out << "edges_file = " << c.edges_file << "\n";
  out << "\n[consensus]\n"
      << "p = " << format_real(c.p) << "\n"
      << "gamma = " << format_real(c.gamma) << "\n"
      << "comm = " << comm[static_cast<int>(c.comm)] << "\n"
      << "tau = " << c.tau << "\n"
      << "u = " << format_real(c.u) << "\n";
  if (!switching.empty()) out << "switching = " << switching << "\n";
  out << "switch_period = " << c.switch_period << "\n"
      << "H = " << c.period << "\n"
      << "couple_current_states = " << (c.couple_current_states ? "true" : "false")
      << "\n"
      << "state_dim = " << c.state_dim << "\n\n"
      << "[objective]\n"
      << "objective = "
      << (c.objective == ObjectiveKind::kQuadratic ? "quadratic" : "logistic") << "\n"
      << "dim = " << c.dim << "\n"
      << "samples = " << c.samples << "\n"
      << "batch = " << c.batch << "\n"
      << "heterogeneity = " << format_real(c.heterogeneity) << "\n"
      << "noise = " << format_real(c.noise) << "\n"
      << "regularization = " << format_real(c.regularization) << "\n";
  if (!c.dataset.empty()) out << "dataset = " << c.dataset << "\n";
  out << "partition = " << partition[static_cast<int>(c.partition)] << "\n"
      << "shards_per_worker = " << c.shards_per_worker << "\n"
      << "dirichlet_beta = " << format_real(c.dirichlet_beta) << "\n\n"
      << "[schedule]\n"
      << "a = " << (c.offset ? format_real(*c.offset) : std::string("auto")) << "\n"
      << "policy = " << policy << "\n\n"
      << "[compressor]\n"
      << "compressor = " << compressor[static_cast<int>(c.compressor)] << "\n"
      << "k = " << c.compressor_k << "\n";
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_config_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ngo
