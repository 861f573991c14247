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
#include <vector>

#include "ngo/matrix.hpp"
#include "ngo/rng.hpp"

namespace ngo {

enum class CompressorKind { kTopK, kRandomK, kIdentity };

/// Contractive compression operator: E ||Q(x) - x||^2 <= alpha ||x||^2.
struct Compressor {
  CompressorKind kind = CompressorKind::kIdentity;
  int k = 0;  // kept coordinates; ignored for identity

  static Compressor top_k(int k) { return {CompressorKind::kTopK, k}; }
  static Compressor random_k(int k) { return {CompressorKind::kRandomK, k}; }
  static Compressor identity() { return {CompressorKind::kIdentity, 0}; }

  /// 1 - k/d for the sparsifiers, 0 for identity.
  double alpha(int dim) const;
  int kept(int dim) const { return kind == CompressorKind::kIdentity ? dim : k; }
};

/// Sparse message: 32-bit index plus 64-bit value per kept coordinate.
struct Payload {
  int dim = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  static constexpr int kBitsPerEntry = 32 + 64;
  long long bits() const {
    return static_cast<long long>(indices.size()) * kBitsPerEntry;
  }
  Vector reconstruct() const;
};

struct Compressed {
  Payload payload;
  Vector reconstructed;
};

/// top_k keeps the k largest magnitudes (lower index wins ties), random_k
/// keeps k indices drawn uniformly without replacement from rng. Throws
/// kInvalidK unless 0 <= k <= d.
Compressed compress(const Compressor& compressor, std::span<const double> x,
                    CounterRng& rng);
Compressed compress(const Compressor& compressor, std::span<const double> x);

struct ContractionCheck {
  double empirical_alpha = 0.0;  // worst ratio (top_k, identity) or mean (random_k)
  double worst_ratio = 0.0;
  double mean_ratio = 0.0;
  bool pass = false;
};

/// Draws standard-normal vectors and measures ||Q(x) - x||^2 / ||x||^2.
/// Deterministic kinds must satisfy the bound on every draw; random_k must
/// satisfy it on average within 3 / sqrt(trials).
ContractionCheck verify_contraction(const Compressor& compressor, int dim,
                                    int trials, std::uint64_t seed);

}  // namespace ngo
