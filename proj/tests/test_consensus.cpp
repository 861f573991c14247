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
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ngo/consensus.hpp"
#include "ngo/diagnostics.hpp"
#include "ngo/error.hpp"
#include "oracles.hpp"

using namespace ngo;

namespace {

Population normal_population(int n, int d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Population p(n, d);
  for (int i = 0; i < n; ++i)
    for (double& v : p.state(i)) v = normal(gen);
  return p;
}

std::vector<Vector> states_of(const Population& p) {
  std::vector<Vector> out;
  for (int i = 0; i < p.n(); ++i) out.emplace_back(p.state(i).begin(), p.state(i).end());
  return out;
}

struct WarningCapture {
  std::vector<std::string> seen;
  WarningHandler previous;
  WarningCapture() {
    previous = set_warning_handler([this](const std::string& m) { seen.push_back(m); });
  }
  ~WarningCapture() { set_warning_handler(previous); }
};

const Matrix kPair{{0.5, 0.5}, {0.5, 0.5}};

std::vector<ConsensusProtocol> all_protocols(int n) {
  Switching sw;
  sw.schedule = {metropolis_weights(Topology::ring(n)).matrix(),
                 metropolis_weights(Topology::complete(n)).matrix()};
  sw.period = 3;
  std::vector<ConsensusProtocol> out;
  for (double p : {0.5, 0.6, 1.0}) {
    out.push_back({p, 0.05, Synchronous{}});
    out.push_back({p, 0.05, Delayed{3}});
    out.push_back({p, 0.05, RandomGraph{0.4, 11}});
    out.push_back({p, 0.05, sw});
  }
  return out;
}

}  // namespace

TEST_SUITE("consensus") {

TEST_CASE("coupling examples") {
  const Vector z{1.5, -0.25, 0.0, 7.0};
  CHECK(coupling(z, 1.0) == z);
  CHECK(coupling(Vector{0.25}, 0.5)[0] == 1.0);
  CHECK(coupling(Vector{-4.0}, 0.75)[0] == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(coupling(0.0, 0.6) == 0.0);
  for (double p : {0.5, 0.6, 0.9}) {
    for (double v : {0.1, 2.0, 13.0}) CHECK(coupling(-v, p) == -coupling(v, p));
  }
  CHECK_THROWS_AS(coupling(z, 0.3), Error);
  CHECK_THROWS_AS(coupling(z, 1.2), Error);
}

TEST_CASE("sync index examples and pairwise oracle") {
  CHECK(sync_index(Population(4, 3, 2.5)) == 0.0);
  CHECK(sync_index(Population::from_scalars(Vector{1.0, -1.0})) == 2.0);
  CHECK(sync_index(Population::from_scalars(Vector{0.0, 3.0, 6.0})) == 18.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Population p = normal_population(9, 4, seed);
    CHECK(sync_index(p) == doctest::Approx(oracle::pairwise_sync_index(states_of(p))).epsilon(1e-12));
  }
}

TEST_CASE("hand-computed gossip rounds on two workers") {
  const Population x = Population::from_scalars(Vector{0.0, 2.0});
  const Population lin = gossip_round(x, kPair, {1.0, 0.5, Synchronous{}}, 0);
  CHECK(lin.state(0)[0] == 0.5);
  CHECK(lin.state(1)[0] == 1.5);
  CHECK(sync_index(lin) == 0.5);
  const Population sgn = gossip_round(x, kPair, {0.5, 0.1, Synchronous{}}, 0);
  CHECK(sgn.state(0)[0] == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(sgn.state(1)[0] == doctest::Approx(1.95).epsilon(1e-15));
}

TEST_CASE("shape mismatch is rejected") {
  const Population x(3, 1);
  try {
    gossip_round(x, kPair, {}, 0);
    FAIL("expected shape error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShapeError);
  }
}

TEST_CASE("identical states are a fixed point of every protocol") {
  const int n = 6;
  const Matrix w = metropolis_weights(Topology::ring(n)).matrix();
  const Population x(n, 3, -1.25);
  for (const auto& proto : all_protocols(n)) {
    StateHistory history(3);
    Population cur = x;
    for (int r = 0; r < 20; ++r) {
      history.push(cur);
      cur = gossip_round(cur, w, proto, r, &history);
    }
    CHECK(cur == x);
  }
}

TEST_CASE("mean preservation") {
  const int n = 10;
  const Matrix w = metropolis_weights(Topology::ring(n)).matrix();
  for (const auto& proto : all_protocols(n)) {
    Population cur = normal_population(n, 2, 5);
    StateHistory history(3);
    for (int r = 0; r < 200; ++r) {
      history.push(cur);
      const Vector before = cur.mean();
      double xmax = 0.0;
      for (double v : cur.raw()) xmax = std::max(xmax, std::abs(v));
      cur = gossip_round(cur, w, proto, r, &history);
      const Vector after = cur.mean();
      double drift = 0.0;
      for (std::size_t k = 0; k < after.size(); ++k) drift += (after[k] - before[k]) * (after[k] - before[k]);
      REQUIRE(std::sqrt(drift) < 1e-12 * (1.0 + xmax));
    }
  }
}

TEST_CASE("delay zero matches synchronous bitwise") {
  const int n = 8;
  const Matrix w = metropolis_weights(Topology::ring(n)).matrix();
  Population a = normal_population(n, 2, 3);
  Population b = a;
  StateHistory history(0);
  for (int r = 0; r < 50; ++r) {
    a = gossip_round(a, w, {0.6, 0.05, Synchronous{}}, r);
    history.push(b);
    b = gossip_round(b, w, {0.6, 0.05, Delayed{0}}, r, &history);
    REQUIRE(a == b);
  }
}

TEST_CASE("state history serves the initial state until it fills") {
  StateHistory h(2);
  const Population p0 = Population::from_scalars(Vector{0.0, 1.0});
  const Population p1 = Population::from_scalars(Vector{2.0, 3.0});
  const Population p2 = Population::from_scalars(Vector{4.0, 5.0});
  const Population p3 = Population::from_scalars(Vector{6.0, 7.0});
  h.push(p0);
  CHECK(h.stale() == p0);
  h.push(p1);
  CHECK(h.stale() == p0);
  h.push(p2);
  CHECK(h.stale() == p0);
  h.push(p3);
  CHECK(h.stale() == p1);
}

TEST_CASE("linear contraction per round") {
  for (int n : {5, 8, 12}) {
    const auto w = metropolis_weights(Topology::ring(n));
    const Vector eig = symmetric_eigenvalues(laplacian(w));
    const double gamma = 0.3;
    const double factor = std::pow(1.0 - gamma * eig[1], 2) + 1e-9;
    const SyncTrace trace = simulate_consensus(normal_population(n, 1, n), w.matrix(),
                                               {1.0, gamma, Synchronous{}}, 400, 1e-12);
    REQUIRE(trace.rows.size() > 2);
    for (std::size_t t = 1; t < trace.rows.size(); ++t) {
      CHECK(trace.rows[t].v < trace.rows[t - 1].v);
      CHECK(trace.rows[t].v <= factor * trace.rows[t - 1].v);
    }
  }
}

TEST_CASE("simulate_consensus stops at tolerance") {
  const auto w = metropolis_weights(Topology::ring(5)).matrix();
  const SyncTrace done = simulate_consensus(Population(5, 1, 1.0), w, {}, 100, 1e-12);
  REQUIRE(done.rows.size() == 1);
  CHECK(done.rows[0].v == 0.0);
  std::ostringstream csv;
  write_sync_trace_csv(csv, done);
  CHECK(csv.str().rfind("round,V,mean_norm\n0,0,1\n", 0) == 0);
}

TEST_CASE("stability warning for a large linear rate") {
  WarningCapture capture;
  const auto w = metropolis_weights(Topology::ring(6)).matrix();
  gossip_round(Population(6, 1), w, {1.0, 0.6, Synchronous{}}, 0);
  CHECK(capture.seen.size() == 1);
  gossip_round(Population(6, 1), w, {1.0, 0.2, Synchronous{}}, 0);
  CHECK(capture.seen.size() == 1);
}

TEST_CASE("random model is deterministic in its seed and uses 0/1 weights") {
  const int n = 10;
  const auto w = metropolis_weights(Topology::complete(n)).matrix();
  const Population x = normal_population(n, 1, 2);
  const ConsensusProtocol a{1.0, 0.05, RandomGraph{0.4, 7}};
  const ConsensusProtocol b{1.0, 0.05, RandomGraph{0.4, 8}};
  CHECK(gossip_round(x, w, a, 3) == gossip_round(x, w, a, 3));
  CHECK_FALSE(gossip_round(x, w, a, 3) == gossip_round(x, w, b, 3));
  // u = 1 on the complete support activates every edge with weight one.
  const Population full = gossip_round(x, w, {1.0, 0.05, RandomGraph{1.0, 1}}, 0);
  const double rate = 0.05 / (n - 1);
  const Vector m = x.mean();
  for (int i = 0; i < n; ++i) {
    const double expect = x.state(i)[0] + rate * n * (m[0] - x.state(i)[0]);
    CHECK(full.state(i)[0] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("switching contracts at least at the slowest scheduled rate") {
  const int n = 8;
  Switching sw;
  sw.schedule = {metropolis_weights(Topology::ring(n)).matrix(),
                 metropolis_weights(Topology::complete(n)).matrix()};
  sw.period = 5;
  double lambda_star = 1e9;
  for (const auto& m : sw.schedule) lambda_star = std::min(lambda_star, symmetric_eigenvalues(laplacian(m))[1]);
  const double gamma = 0.2;
  Population x = normal_population(n, 1, 9);
  const double v0 = sync_index(x);
  const int window = 100;
  for (int r = 0; r < window; ++r) x = gossip_round(x, Matrix(n, n), {1.0, gamma, sw}, r);
  const double rate = std::log(std::sqrt(v0 / sync_index(x))) / window;
  CHECK(rate >= gamma * lambda_star - 1e-3);
}

TEST_CASE("finite-time bound closed form") {
  CHECK(finite_time_bound(1.0, 1.0, 0.5, 2.0 / 9) ==
        doctest::Approx(1.0 / (4.0 * 0.5 * std::sqrt(2.0 / 9))).epsilon(1e-14));
  CHECK(finite_time_bound(1.0, 1.0, 0.5, 2.0 / 9) == doctest::Approx(1.0607).epsilon(1e-4));
  CHECK(finite_time_bound(0.0, 0.1, 0.6, 0.3) == 0.0);
  CHECK(finite_time_bound(3.0, 0.2, 0.7, 0.3) ==
        doctest::Approx(2.0 * finite_time_bound(3.0, 0.4, 0.7, 0.3)).epsilon(1e-14));
  try {
    finite_time_bound(1.0, 0.1, 1.0, 0.3);
    FAIL("expected bound-undefined");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBoundUndefined);
  }
}

TEST_CASE("finite-time plan keeps the chatter band under the tolerance") {
  const FiniteTimePlan plan = plan_finite_time(10.0, 0.05, 0.5, 0.06, 2.0 / 3, 10, 1e-7);
  CHECK(plan.refinement >= 1);
  CHECK(plan.step_gamma == doctest::Approx(0.05 / plan.refinement));
  CHECK(plan.predicted_band <= 1e-8);
  CHECK(plan.round_budget ==
        static_cast<long long>(plan.refinement) * (static_cast<long long>(std::ceil(plan.t_star)) + 1));
}

TEST_CASE("delay thresholds") {
  const Topology k2 = Topology::ring(2);
  const auto s2 = spectral_summary(laplacian(adjacency_matrix(k2)), k2);
  CHECK(delay_threshold(s2) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-12));
  const Topology c4 = Topology::ring(4);
  const auto s4 = spectral_summary(laplacian(adjacency_matrix(c4)), c4);
  CHECK(delay_threshold(s4) == doctest::Approx(std::numbers::pi / 8).epsilon(1e-12));
  SpectralSummary doubled = s4;
  doubled.lambda_n *= 2.0;
  CHECK(delay_threshold(doubled) == doctest::Approx(delay_threshold(s4) / 2));
}

TEST_CASE("protocol validation") {
  const auto w = metropolis_weights(Topology::ring(4)).matrix();
  const Population x(4, 1);
  CHECK_THROWS_AS(gossip_round(x, w, {0.4, 0.1, Synchronous{}}, 0), Error);
  CHECK_THROWS_AS(gossip_round(x, w, {1.0, -0.1, Synchronous{}}, 0), Error);
  CHECK_THROWS_AS(gossip_round(x, w, {1.0, 0.1, RandomGraph{0.0, 1}}, 0), Error);
  CHECK_THROWS_AS(gossip_round(x, w, {1.0, 0.1, Delayed{2}}, 0, nullptr), Error);
}

}  // TEST_SUITE
