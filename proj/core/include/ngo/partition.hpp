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
#include <span>
#include <variant>
#include <vector>

namespace ngo {

struct IidScheme {};
struct ShardScheme {
  int shards_per_worker = 2;
};
struct DirichletScheme {
  double beta = 0.5;
};

using PartitionScheme = std::variant<IidScheme, ShardScheme, DirichletScheme>;

/// Each sample belongs to exactly one worker and no worker is empty.
struct Partition {
  int workers = 0;
  std::vector<int> assignment;  // worker per sample

  std::vector<int> members(int worker) const;
  std::vector<int> sizes() const;
};

/// iid:       shuffle and deal round-robin.
/// shards:    label-sorted samples cut into workers * shards_per_worker
///            contiguous shards, dealt without replacement.
/// dirichlet: per class k, p_k ~ Dir_n(beta); each sample of class k goes to
///            worker j with probability p_kj.
/// Draws that leave a worker empty are retried up to 100 times before
/// throwing kPartitionFailed.
Partition partition_data(std::span<const int> labels, int workers,
                         const PartitionScheme& scheme, std::uint64_t seed);

Partition partition_data(int sample_count, int workers,
                         const PartitionScheme& scheme, std::uint64_t seed);

}  // namespace ngo
