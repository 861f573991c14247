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
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ngo/compress.hpp"
#include "ngo/consensus.hpp"
#include "ngo/objective.hpp"

namespace ngo {

/// eta_t = 4 / (mu (a + t)), averaging weights w_t = (a + t)^2.
struct Schedule {
  double a = 0.0;
  double mu = 1.0;

  double eta(int t) const { return 4.0 / (mu * (a + t)); }
  double weight(int t) const { return (a + t) * (a + t); }
  /// S_T = sum_{t < T} w_t
  double weight_sum(int horizon) const;
};

enum class Algorithm {
  kCentralized,
  kGossip,
  kNgo,
  kLocalSgd,
  kCompressedNgo,
};

/// Smallest admissible offset: 16 kappa for centralized / linear gossip /
/// local SGD, max(5 / beta, 15 kappa) for the nonlinear variants, where
/// beta = 1 - gamma lambda2(L(W)).
double required_offset(Algorithm algorithm, double kappa, double beta);

/// Smallest offset satisfying both the algorithm's constraint and
/// eta_0 <= 1/(4L).
double default_offset(Algorithm algorithm, double kappa, double beta);

enum class ConstraintPolicy { kRefuse, kWarn };

/// Throws kScheduleConstraint (or warns) when a is below required_offset or
/// eta_0 > 1/(4L).
void check_schedule(const Schedule& schedule, Algorithm algorithm,
                    const ProblemConstants& constants, double beta,
                    ConstraintPolicy policy);

struct RunRecord {
  int t = 0;
  double v = 0.0;
  double loss_gap_mean = 0.0;  // f(mean x^t) - f*
  double loss_gap_avg = 0.0;   // f(sum_{s<t} w_s mean x^s / S_t) - f*; row 0 uses mean x^0
  long long comm_rounds = 0;
  long long bits_sent = 0;
};

struct RunResult {
  // Rows t = 0..T; row t describes the population entering step t.
  std::vector<RunRecord> records;
  std::vector<Vector> mean_trajectory;  // mean x^t, t = 0..T
  Population final_population;
};

struct TrainOptions {
  int rounds = 1000;       // T
  int batch = 1;           // 0 means full batch
  std::uint64_t seed = 0;
  Vector x0;               // common initial point; empty means zeros
  ConsensusProtocol protocol;
  int period = 1;          // communicate when (t + 1) % period == 0
  // Couple x^(t) differences instead of the half-step values.
  bool couple_current_states = false;
  ConstraintPolicy policy = ConstraintPolicy::kRefuse;
  // Called with the values fed to the coupling each communication round.
  std::function<void(int, const Population&)> on_consensus_inputs;
};

RunResult run_centralized(const Problem& problem, const Schedule& schedule,
                          const TrainOptions& options);

/// Linear gossip SGD; options.protocol.p is forced to 1 and period to 1.
RunResult run_gossip_sgd(const Problem& problem, const Matrix& weights,
                         const Schedule& schedule, TrainOptions options);

/// Nonlinear gossip SGD with coupling exponent options.protocol.p.
RunResult run_ngo_sgd(const Problem& problem, const Matrix& weights,
                      const Schedule& schedule, const TrainOptions& options);

/// Linear gossip executed only every options.period rounds, closing each
/// block of period local steps; period = T + 1 never communicates.
RunResult run_local_sgd(const Problem& problem, const Matrix& weights,
                        const Schedule& schedule, TrainOptions options);

/// NGO over compressed messages with public replicas x_hat (initialized to
/// zero) updated by q_i = Q(x_i^{t+1/2} - x_hat_i).
RunResult run_compressed_ngo(const Problem& problem, const Matrix& weights,
                             const Schedule& schedule,
                             const TrainOptions& options,
                             const Compressor& compressor);

/// sum_{t < T} w_t mean_x^t / S_T
Vector weighted_average_iterate(const std::vector<Vector>& trajectory,
                                const Schedule& schedule, int horizon);

enum class BoundVariant { kCentralized, kGossip, kNgo };

struct BoundReport {
  int horizon = 0;
  int sync_cutoff = 0;
  double term_init = 0.0;
  double term_variance = 0.0;
  double term_sync = 0.0;
  double total = 0.0;
  double observed_gap = 0.0;
};

/// Right-hand side of the convergence rate at horizon T:
///   mu a^3 / (8 S_T) ||xbar0 - x*||^2 + 4 T (T + 2a) sigma^2 / (mu n S_T)
///   + (2L + mu) / (n S_T) sum_{t <= cutoff} w_t V^t
/// The sync sum runs to T for gossip, to ngo_cutoff for NGO and is zero for
/// centralized. Throws kIncompleteTrace when records stop before T.
BoundReport evaluate_bound(const std::vector<RunRecord>& records,
                           const ProblemConstants& constants,
                           const Schedule& schedule, BoundVariant variant,
                           int workers, std::span<const double> x_bar0,
                           std::span<const double> x_star, int horizon,
                           std::optional<int> ngo_cutoff = std::nullopt);

/// ceil(T*) with V0 taken as the largest V on the trace: each SGD step can
/// reopen disagreement, and T* bounds the settling time from any state.
int ngo_sync_cutoff(const std::vector<RunRecord>& records, double gamma,
                    double p, double lambda2_b);

struct DescentCheck {
  int rounds_checked = 0;
  int violations = 0;
  double worst_relative_excess = 0.0;
};

/// Per-round check of
///   ||xbar^{t+1} - x*||^2 <= (1 - mu eta/2) ||xbar^t - x*||^2 + eta^2 s^2/n
///       - 2 eta (1 - 2 L eta) e_t + eta (2 eta L^2 + L eta + mu) V^t / n
/// with e_t = f(xbar^t) - f*, evaluated on exact quantities.
DescentCheck descent_check(const RunResult& result, const Problem& problem,
                           const Schedule& schedule, double sigma_bar_sq,
                           double relative_slack);

/// nu_t^2 = min{ ||sum grad f_i(xbar)||^2 /
///               ||sum grad f_i(x_i) - sum grad f_i(xbar)||^2, eta^{-2 eps} }.
/// Returns nu_t; a zero denominator yields the cap eta^{-eps}.
double sync_parameter(const std::vector<Vector>& grads_at_workers,
                      const std::vector<Vector>& grads_at_mean, double eta,
                      double epsilon = 0.5);

double sync_parameter(const Objectives& objectives,
                      const Population& population, double eta,
                      double epsilon = 0.5);

/// CSV "t,V,loss_gap_mean,loss_gap_avg,comm_rounds,bits_sent".
void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records);
/// "key = value" lines.
void write_bound_text(std::ostream& out, const BoundReport& report);
void write_bound_csv(std::ostream& out, const BoundReport& report);

}  // namespace ngo
