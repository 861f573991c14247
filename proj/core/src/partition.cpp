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

#include "ngo/partition.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "ngo/error.hpp"
#include "ngo/rng.hpp"

namespace ngo {
namespace {

constexpr int kMaxAttempts = 100;

void shuffle(std::vector<int>& v, CounterRng& rng) {
  for (std::size_t s = v.size(); s > 1; --s) {
    const auto pick = static_cast<std::size_t>(uniform_index(rng, s));
    std::swap(v[s - 1], v[pick]);
  }
}

bool no_empty_worker(const Partition& p) {
  const auto sizes = p.sizes();
  return std::none_of(sizes.begin(), sizes.end(), [](int s) { return s == 0; });
}

Partition deal_iid(int count, int workers, CounterRng& rng) {
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  Partition p{workers, std::vector<int>(count)};
  for (int k = 0; k < count; ++k) p.assignment[order[k]] = k % workers;
  return p;
}

Partition deal_shards(std::span<const int> labels, int workers, int per_worker,
                      CounterRng& rng) {
  const int count = static_cast<int>(labels.size());
  const int shards = workers * per_worker;
  if (shards > count) {
    throw Error(ErrorCode::kPartitionFailed,
                "more shards than samples (" + std::to_string(shards) + " > " +
                    std::to_string(count) + ")");
  }
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return labels[a] < labels[b]; });
  std::vector<int> shard_ids(shards);
  std::iota(shard_ids.begin(), shard_ids.end(), 0);
  shuffle(shard_ids, rng);
  Partition p{workers, std::vector<int>(count)};
  for (int s = 0; s < shards; ++s) {
    const int owner = s / per_worker;
    const int id = shard_ids[s];
    const long long lo = static_cast<long long>(id) * count / shards;
    const long long hi = static_cast<long long>(id + 1) * count / shards;
    for (long long k = lo; k < hi; ++k) p.assignment[order[k]] = owner;
  }
  return p;
}

Partition deal_dirichlet(std::span<const int> labels, int workers, double beta,
                         CounterRng& rng) {
  std::map<int, std::vector<double>> share;
  std::gamma_distribution<double> gamma(beta, 1.0);
  for (int label : labels) {
    if (share.contains(label)) continue;
    std::vector<double> w(workers);
    double total = 0.0;
    for (double& v : w) {
      v = gamma(rng);
      total += v;
    }
    if (total <= 0.0) {
      std::fill(w.begin(), w.end(), 1.0);
      total = workers;
    }
    for (double& v : w) v /= total;
    share.emplace(label, std::move(w));
  }
  Partition p{workers, std::vector<int>(labels.size())};
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const auto& w = share.at(labels[k]);
    const double u = rng.uniform();
    double acc = 0.0;
    int owner = workers - 1;
    for (int j = 0; j < workers; ++j) {
      acc += w[j];
      if (u < acc) {
        owner = j;
        break;
      }
    }
    p.assignment[k] = owner;
  }
  return p;
}

}  // namespace

std::vector<int> Partition::members(int worker) const {
  std::vector<int> out;
  for (std::size_t k = 0; k < assignment.size(); ++k) {
    if (assignment[k] == worker) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::vector<int> Partition::sizes() const {
  std::vector<int> out(workers, 0);
  for (int w : assignment) ++out[w];
  return out;
}

Partition partition_data(std::span<const int> labels, int workers,
                         const PartitionScheme& scheme, std::uint64_t seed) {
  const int count = static_cast<int>(labels.size());
  if (workers < 1) throw Error(ErrorCode::kInvalidSize, "workers must be >= 1");
  if (count < workers) {
    throw Error(ErrorCode::kPartitionFailed,
                std::to_string(count) + " samples cannot cover " +
                    std::to_string(workers) + " workers");
  }
  if (const auto* s = std::get_if<ShardScheme>(&scheme); s && s->shards_per_worker < 1) {
    throw Error(ErrorCode::kInvalidArgument, "shards_per_worker must be >= 1");
  }
  if (const auto* s = std::get_if<DirichletScheme>(&scheme); s && !(s->beta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dirichlet beta must be > 0");
  }
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    CounterRng rng = make_stream(seed, Stream::kPartition, attempt, 0);
    Partition p = std::visit(
        [&](const auto& s) -> Partition {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, IidScheme>) {
            return deal_iid(count, workers, rng);
          } else if constexpr (std::is_same_v<S, ShardScheme>) {
            return deal_shards(labels, workers, s.shards_per_worker, rng);
          } else {
            return deal_dirichlet(labels, workers, s.beta, rng);
          }
        },
        scheme);
    if (no_empty_worker(p)) return p;
  }
  throw Error(ErrorCode::kPartitionFailed,
              "every draw left a worker without samples");
}

Partition partition_data(int sample_count, int workers,
                         const PartitionScheme& scheme, std::uint64_t seed) {
  if (sample_count < 0) throw Error(ErrorCode::kInvalidSize, "negative sample count");
  const std::vector<int> labels(sample_count, 0);
  return partition_data(labels, workers, scheme, seed);
}

}  // namespace ngo
