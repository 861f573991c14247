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

#include <benchmark/benchmark.h>

#include <random>

#include "ngo/compress.hpp"
#include "ngo/consensus.hpp"
#include "ngo/graph.hpp"
#include "ngo/rng.hpp"

namespace {

ngo::Matrix random_symmetric(int n) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal;
  ngo::Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a(i, j) = a(j, i) = normal(gen);
  return a;
}

void BM_JacobiEigenvalues(benchmark::State& state) {
  const ngo::Matrix a = random_symmetric(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ngo::symmetric_eigenvalues(a));
}
BENCHMARK(BM_JacobiEigenvalues)->Arg(8)->Arg(32)->Arg(64);

void BM_GossipRound(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const auto w = ngo::metropolis_weights(ngo::Topology::ring(n));
  ngo::Population pop(n, d);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  for (int i = 0; i < n; ++i)
    for (double& v : pop.state(i)) v = normal(gen);
  ngo::ConsensusProtocol protocol{0.6, 0.05, ngo::Synchronous{}};
  int round = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ngo::gossip_round(pop, w, protocol, round++));
  }
}
BENCHMARK(BM_GossipRound)->Args({10, 1})->Args({10, 100})->Args({50, 100});

void BM_TopK(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal;
  ngo::Vector x(d);
  for (double& v : x) v = normal(gen);
  const auto c = ngo::Compressor::top_k(d / 8);
  for (auto _ : state) benchmark::DoNotOptimize(ngo::compress(c, x));
}
BENCHMARK(BM_TopK)->Arg(64)->Arg(1024)->Arg(16384);

}  // namespace

BENCHMARK_MAIN();
