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

#include <cmath>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "ngo/graph.hpp"
#include "ngo/matrix.hpp"

namespace ngo {

/// n worker states of dimension d, stored row-major. The mean and the
/// disagreement vectors are always recomputed from the states.
class Population {
 public:
  Population() = default;
  Population(int n, int d, double fill = 0.0);
  explicit Population(const std::vector<Vector>& states);
  static Population from_scalars(std::span<const double> values);

  int n() const noexcept { return n_; }
  int d() const noexcept { return d_; }

  std::span<double> state(int i) noexcept {
    return {data_.data() + static_cast<std::size_t>(i) * d_,
            static_cast<std::size_t>(d_)};
  }
  std::span<const double> state(int i) const noexcept {
    return {data_.data() + static_cast<std::size_t>(i) * d_,
            static_cast<std::size_t>(d_)};
  }

  Vector mean() const;
  std::span<const double> raw() const noexcept { return data_; }

  friend bool operator==(const Population&, const Population&) = default;

 private:
  int n_ = 0;
  int d_ = 0;
  std::vector<double> data_;
};

/// Synchronization index V = sum_i ||x_i - mean||^2.
double sync_index(const Population& population);

/// Elementwise sign(z)|z|^{2p-1}. p = 1 returns z unchanged.
Vector coupling(std::span<const double> z, double p);

inline double coupling(double z, double p) {
  if (p == 1.0) return z;
  if (z == 0.0) return 0.0;
  if (p == 0.5) return z > 0.0 ? 1.0 : -1.0;
  const double mag = std::pow(std::abs(z), 2.0 * p - 1.0);
  return z > 0.0 ? mag : -mag;
}

struct Synchronous {};

/// Neighbor differences are taken from the population tau rounds ago.
struct Delayed {
  int tau = 0;
};

/// Each edge of the base support is active with probability u in every
/// round, independently. Active edges carry weight 1 and the rate is
/// rescaled to gamma / (u (n - 1)).
struct RandomGraph {
  double u = 0.5;
  std::uint64_t seed = 0;
};

/// Round-robin over a schedule of coupling matrices; entry k is used for
/// rounds [k * period, (k + 1) * period) modulo the schedule length.
struct Switching {
  std::vector<Matrix> schedule;
  int period = 1;
};

using CommModel = std::variant<Synchronous, Delayed, RandomGraph, Switching>;

struct ConsensusProtocol {
  double p = 1.0;       // coupling exponent in [1/2, 1]; 1 is linear gossip
  double gamma = 0.05;  // synchronization rate
  CommModel model = Synchronous{};
};

/// Throws kInvalidExponent / kInvalidArgument for an unusable protocol.
void validate(const ConsensusProtocol& protocol);

/// Sliding window of past populations for the delayed model. Before the
/// window fills, the oldest retained state (the initial one) stands in.
class StateHistory {
 public:
  explicit StateHistory(int tau = 0) : tau_(tau) {}

  void push(const Population& population);
  /// State from tau rounds before the most recent push.
  const Population& stale() const;
  bool empty() const noexcept { return window_.empty(); }
  int tau() const noexcept { return tau_; }

 private:
  int tau_;
  std::deque<Population> window_;
};

/// x_i <- base_i + rate * sum_j w_ij phi(src_j - src_i) for the
/// communication model's active weights in this round. Every worker update
/// reads only the frozen inputs. Throws kShapeError on size mismatch.
Population consensus_update(const Population& base, const Population& source,
                            const Matrix& weights,
                            const ConsensusProtocol& protocol, int round);

/// One pure gossip round. For the delayed model, history must hold the
/// populations of previous rounds (the current one included); the other
/// models ignore it.
Population gossip_round(const Population& population, const Matrix& weights,
                        const ConsensusProtocol& protocol, int round,
                        const StateHistory* history = nullptr);

inline Population gossip_round(const Population& population,
                               const WeightMatrix& w,
                               const ConsensusProtocol& protocol, int round,
                               const StateHistory* history = nullptr) {
  return gossip_round(population, w.matrix(), protocol, round, history);
}

/// Emits a warning when p = 1 and gamma >= 1 / (max degree of the support).
void check_stability(const Matrix& weights, const ConsensusProtocol& protocol);

/// Continuous-time settling bound
///   T* = V0^{1-p} / (4 gamma (1-p) lambda2(L(B))^p).
/// Throws kBoundUndefined for p = 1 (and kInvalidExponent outside [1/2, 1]).
double finite_time_bound(double v0, double gamma, double p, double lambda2_b);

/// Forward-Euler discretization of the finite-time flow. A sign-like
/// coupling does not land on consensus; it chatters in a band whose size
/// scales with the per-round step, so the step gamma is split into
/// refinement sub-steps until the predicted band sits well below the
/// tolerance.
struct FiniteTimePlan {
  double t_star = 0.0;          // continuous-time bound
  int refinement = 1;           // sub-steps per unit time
  double step_gamma = 0.0;      // gamma / refinement
  long long round_budget = 0;   // refinement * (ceil(T*) + 1)
  double predicted_band = 0.0;  // V level of the chatter band
};

/// \p max_weighted_degree is max_i sum_{j != i} W_ij; \p tolerance is the
/// absolute V target.
FiniteTimePlan plan_finite_time(double v0, double gamma, double p,
                                double lambda2_b, double max_weighted_degree,
                                int n, double tolerance);

/// Maximal uniform delay pi / (2 lambda_n(L)) in continuous-time units.
double delay_threshold(const SpectralSummary& spectral);

struct SyncRow {
  int round = 0;
  double v = 0.0;
  Vector mean;
};

struct SyncTrace {
  std::vector<SyncRow> rows;
};

/// Applies gossip rounds until V <= tolerance or max_rounds rounds have run.
/// Row 0 is the initial population.
SyncTrace simulate_consensus(const Population& initial, const Matrix& weights,
                             const ConsensusProtocol& protocol, int max_rounds,
                             double tolerance);

/// CSV with header "round,V,mean_norm".
void write_sync_trace_csv(std::ostream& out, const SyncTrace& trace);

}  // namespace ngo
