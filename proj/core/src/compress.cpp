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

#include "ngo/compress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ngo/error.hpp"

namespace ngo {
namespace {

void check_k(const Compressor& c, std::size_t dim) {
  if (c.kind == CompressorKind::kIdentity) return;
  if (c.k < 0 || static_cast<std::size_t>(c.k) > dim) {
    throw Error(ErrorCode::kInvalidK, "k = " + std::to_string(c.k) +
                                          " outside [0, " + std::to_string(dim) +
                                          "]");
  }
}

Compressed from_indices(std::span<const double> x, std::vector<std::uint32_t> idx) {
  std::sort(idx.begin(), idx.end());
  Compressed out;
  out.payload.dim = static_cast<int>(x.size());
  out.payload.values.reserve(idx.size());
  for (auto i : idx) out.payload.values.push_back(x[i]);
  out.payload.indices = std::move(idx);
  out.reconstructed = out.payload.reconstruct();
  return out;
}

}  // namespace

double Compressor::alpha(int dim) const {
  if (kind == CompressorKind::kIdentity || dim == 0) return 0.0;
  return 1.0 - static_cast<double>(k) / dim;
}

Vector Payload::reconstruct() const {
  Vector out(dim, 0.0);
  for (std::size_t e = 0; e < indices.size(); ++e) out[indices[e]] = values[e];
  return out;
}

Compressed compress(const Compressor& compressor, std::span<const double> x,
                    CounterRng& rng) {
  check_k(compressor, x.size());
  const auto d = static_cast<std::uint32_t>(x.size());
  std::vector<std::uint32_t> idx;
  switch (compressor.kind) {
    case CompressorKind::kIdentity:
      idx.resize(d);
      std::iota(idx.begin(), idx.end(), 0u);
      break;
    case CompressorKind::kTopK: {
      idx.resize(d);
      std::iota(idx.begin(), idx.end(), 0u);
      const auto k = static_cast<std::size_t>(compressor.k);
      std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                        [&](std::uint32_t a, std::uint32_t b) {
                          const double ma = std::abs(x[a]);
                          const double mb = std::abs(x[b]);
                          return ma > mb || (ma == mb && a < b);
                        });
      idx.resize(k);
      break;
    }
    case CompressorKind::kRandomK: {
      idx.resize(d);
      std::iota(idx.begin(), idx.end(), 0u);
      const auto k = static_cast<std::size_t>(compressor.k);
      for (std::size_t s = 0; s < k; ++s) {
        const auto pick = s + static_cast<std::size_t>(uniform_index(rng, d - s));
        std::swap(idx[s], idx[pick]);
      }
      idx.resize(k);
      break;
    }
  }
  return from_indices(x, std::move(idx));
}

Compressed compress(const Compressor& compressor, std::span<const double> x) {
  if (compressor.kind == CompressorKind::kRandomK) {
    throw Error(ErrorCode::kInvalidArgument, "random_k needs a random stream");
  }
  CounterRng unused(0, 0, 0);
  return compress(compressor, x, unused);
}

ContractionCheck verify_contraction(const Compressor& compressor, int dim,
                                    int trials, std::uint64_t seed) {
  if (dim < 1 || trials < 1) {
    throw Error(ErrorCode::kInvalidArgument, "dim and trials must be positive");
  }
  check_k(compressor, static_cast<std::size_t>(dim));
  const double alpha = compressor.alpha(dim);
  std::normal_distribution<double> normal(0.0, 1.0);
  ContractionCheck check;
  double sum = 0.0;
  int counted = 0;
  for (int t = 0; t < trials; ++t) {
    CounterRng data = make_stream(seed, Stream::kData, t, 0);
    Vector x(dim);
    for (double& v : x) v = normal(data);
    const double base = squared_norm(x);
    if (base == 0.0) continue;
    CounterRng pick = make_stream(seed, Stream::kCompressor, t, 0);
    const Compressed q = compress(compressor, x, pick);
    double err = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double e = q.reconstructed[j] - x[j];
      err += e * e;
    }
    const double ratio = err / base;
    check.worst_ratio = std::max(check.worst_ratio, ratio);
    sum += ratio;
    ++counted;
  }
  check.mean_ratio = counted > 0 ? sum / counted : 0.0;
  constexpr double kRoundoff = 1e-12;
  if (compressor.kind == CompressorKind::kRandomK) {
    check.empirical_alpha = check.mean_ratio;
    check.pass = check.mean_ratio <= alpha + 3.0 / std::sqrt(trials) + kRoundoff;
  } else {
    check.empirical_alpha = check.worst_ratio;
    check.pass = check.worst_ratio <= alpha + kRoundoff;
  }
  return check;
}

}  // namespace ngo
