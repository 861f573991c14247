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
#include <limits>

namespace ngo {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream. The key is derived from (seed, round,
/// worker) so every worker's draws in every round are independent of
/// scheduling order; output i is a keyed hash of the counter i.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr CounterRng(std::uint64_t seed, std::uint64_t round,
                       std::uint64_t worker) noexcept
      : key_(splitmix64(splitmix64(splitmix64(seed) ^ round) ^
                        (worker * 0xd1b54a32d192ed03ULL))) {}

  explicit constexpr CounterRng(std::uint64_t seed) noexcept
      : CounterRng(seed, 0, 0) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    return splitmix64(key_ + 0x632be59bd9b4e019ULL * ++counter_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

__extension__ typedef unsigned __int128 uint128_t;

/// Uniform integer in [0, n) by multiply-shift; n must be positive.
inline std::uint64_t uniform_index(CounterRng& rng, std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>((static_cast<uint128_t>(rng()) * n) >> 64);
}

/// Stream tags keep different consumers of the same (seed, round, worker)
/// triple from sharing draws.
enum class Stream : std::uint64_t {
  kData = 1,
  kGradient = 2,
  kTopology = 3,
  kCompressor = 4,
  kInit = 5,
  kPartition = 6,
  kNoiseEstimate = 7,
};

inline CounterRng make_stream(std::uint64_t seed, Stream tag,
                              std::uint64_t round, std::uint64_t worker) {
  return CounterRng(splitmix64(seed) ^ (static_cast<std::uint64_t>(tag) << 56),
                    round, worker);
}

}  // namespace ngo
