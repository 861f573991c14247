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

#include "ngo/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include "ngo/diagnostics.hpp"
#include "format.hpp"
#include "ngo/error.hpp"
#include "ngo/rng.hpp"

namespace ngo {

Population::Population(int n, int d, double fill) : n_(n), d_(d) {
  if (n < 1 || d < 1) {
    throw Error(ErrorCode::kShapeError, "population needs n >= 1 and d >= 1");
  }
  data_.assign(static_cast<std::size_t>(n) * d, fill);
}

Population::Population(const std::vector<Vector>& states) {
  if (states.empty() || states.front().empty()) {
    throw Error(ErrorCode::kShapeError, "population needs n >= 1 and d >= 1");
  }
  n_ = static_cast<int>(states.size());
  d_ = static_cast<int>(states.front().size());
  data_.reserve(static_cast<std::size_t>(n_) * d_);
  for (const auto& s : states) {
    if (static_cast<int>(s.size()) != d_) {
      throw Error(ErrorCode::kShapeError, "worker states differ in dimension");
    }
    data_.insert(data_.end(), s.begin(), s.end());
  }
}

Population Population::from_scalars(std::span<const double> values) {
  Population p(static_cast<int>(values.size()), 1);
  std::copy(values.begin(), values.end(), p.data_.begin());
  return p;
}

Vector Population::mean() const {
  Vector m(d_, 0.0);
  for (int i = 0; i < n_; ++i) {
    auto x = state(i);
    for (int k = 0; k < d_; ++k) m[k] += x[k];
  }
  for (double& v : m) v /= n_;
  return m;
}

double sync_index(const Population& population) {
  const Vector m = population.mean();
  double v = 0.0;
  for (int i = 0; i < population.n(); ++i) {
    auto x = population.state(i);
    for (int k = 0; k < population.d(); ++k) {
      const double delta = x[k] - m[k];
      v += delta * delta;
    }
  }
  return v;
}

namespace {

void require_exponent(double p) {
  if (!(p >= 0.5 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidExponent,
                "coupling exponent must lie in [1/2, 1], got " + std::to_string(p));
  }
}

// Active coupling weights and rate for one round of the given model.
struct RoundWeights {
  const Matrix* weights;
  Matrix drawn;
  double rate;
};

RoundWeights round_weights(const Matrix& weights,
                           const ConsensusProtocol& protocol, int round) {
  RoundWeights out{&weights, {}, protocol.gamma};
  if (const auto* random = std::get_if<RandomGraph>(&protocol.model)) {
    const std::size_t n = weights.rows();
    out.drawn = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      CounterRng rng = make_stream(random->seed, Stream::kTopology,
                                   static_cast<std::uint64_t>(round), i);
      for (std::size_t j = i + 1; j < n; ++j) {
        if (weights(i, j) <= 0.0) continue;
        if (rng.uniform() < random->u) out.drawn(i, j) = out.drawn(j, i) = 1.0;
      }
    }
    out.weights = &out.drawn;
    out.rate = protocol.gamma / (random->u * static_cast<double>(n - 1));
  } else if (const auto* sw = std::get_if<Switching>(&protocol.model)) {
    const std::size_t slot =
        (static_cast<std::size_t>(round) / static_cast<std::size_t>(sw->period)) %
        sw->schedule.size();
    out.weights = &sw->schedule[slot];
  }
  return out;
}

int support_degree(const Matrix& w) {
  int worst = 0;
  for (std::size_t i = 0; i < w.rows(); ++i) {
    int deg = 0;
    for (std::size_t j = 0; j < w.cols(); ++j)
      if (i != j && w(i, j) != 0.0) ++deg;
    worst = std::max(worst, deg);
  }
  return worst;
}

}  // namespace

Vector coupling(std::span<const double> z, double p) {
  require_exponent(p);
  Vector out(z.begin(), z.end());
  if (p == 1.0) return out;
  for (double& v : out) v = coupling(v, p);
  return out;
}

void validate(const ConsensusProtocol& protocol) {
  require_exponent(protocol.p);
  if (!(protocol.gamma >= 0.0) || !std::isfinite(protocol.gamma)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must be finite and >= 0");
  }
  if (const auto* d = std::get_if<Delayed>(&protocol.model); d && d->tau < 0) {
    throw Error(ErrorCode::kInvalidArgument, "delay tau must be >= 0");
  }
  if (const auto* r = std::get_if<RandomGraph>(&protocol.model);
      r && !(r->u > 0.0 && r->u <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "edge probability u must be in (0,1]");
  }
  if (const auto* s = std::get_if<Switching>(&protocol.model)) {
    if (s->schedule.empty() || s->period < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "switching needs a non-empty schedule and period >= 1");
    }
  }
}

void StateHistory::push(const Population& population) {
  window_.push_back(population);
  while (static_cast<int>(window_.size()) > tau_ + 1) window_.pop_front();
}

const Population& StateHistory::stale() const {
  if (window_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "state history is empty");
  }
  return window_.front();
}

Population consensus_update(const Population& base, const Population& source,
                            const Matrix& weights,
                            const ConsensusProtocol& protocol, int round) {
  const int n = base.n();
  const int d = base.d();
  if (source.n() != n || source.d() != d ||
      static_cast<int>(weights.rows()) != n || !weights.square()) {
    throw Error(ErrorCode::kShapeError, "population / weight shape mismatch");
  }
  const RoundWeights active = round_weights(weights, protocol, round);
  const Matrix& w = *active.weights;
  if (static_cast<int>(w.rows()) != n || !w.square()) {
    throw Error(ErrorCode::kShapeError, "scheduled weight matrix has wrong size");
  }
  const double p = protocol.p;

  Population next = base;
  Vector acc(d);
  for (int i = 0; i < n; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    const auto xi = source.state(i);
    for (int j = 0; j < n; ++j) {
      const double wij = w(i, j);
      if (j == i || wij == 0.0) continue;
      const auto xj = source.state(j);
      for (int k = 0; k < d; ++k) acc[k] += wij * coupling(xj[k] - xi[k], p);
    }
    auto out = next.state(i);
    for (int k = 0; k < d; ++k) out[k] += active.rate * acc[k];
  }
  return next;
}

Population gossip_round(const Population& population, const Matrix& weights,
                        const ConsensusProtocol& protocol, int round,
                        const StateHistory* history) {
  validate(protocol);
  if (round == 0) check_stability(weights, protocol);
  const Population* source = &population;
  if (const auto* delayed = std::get_if<Delayed>(&protocol.model);
      delayed && delayed->tau > 0) {
    if (history == nullptr || history->empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "delayed gossip needs the state history");
    }
    source = &history->stale();
  }
  return consensus_update(population, *source, weights, protocol, round);
}

void check_stability(const Matrix& weights, const ConsensusProtocol& protocol) {
  if (protocol.p != 1.0 || std::holds_alternative<RandomGraph>(protocol.model)) {
    return;
  }
  int delta = support_degree(weights);
  if (const auto* sw = std::get_if<Switching>(&protocol.model)) {
    for (const auto& m : sw->schedule) delta = std::max(delta, support_degree(m));
  }
  if (delta > 0 && protocol.gamma * delta >= 1.0) {
    warn("gamma = " + std::to_string(protocol.gamma) +
         " is not below 1/max_degree = " + std::to_string(1.0 / delta) +
         "; linear consensus may not be stable");
  }
}

double finite_time_bound(double v0, double gamma, double p, double lambda2_b) {
  require_exponent(p);
  if (p == 1.0) {
    throw Error(ErrorCode::kBoundUndefined, "finite-time bound needs p < 1");
  }
  if (v0 < 0.0) throw Error(ErrorCode::kInvalidArgument, "V0 must be >= 0");
  if (v0 == 0.0) return 0.0;
  if (!(gamma > 0.0) || !(lambda2_b > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "finite-time bound needs gamma > 0 and lambda2(L(B)) > 0");
  }
  return std::pow(v0, 1.0 - p) /
         (4.0 * gamma * (1.0 - p) * std::pow(lambda2_b, p));
}

FiniteTimePlan plan_finite_time(double v0, double gamma, double p,
                                double lambda2_b, double max_weighted_degree,
                                int n, double tolerance) {
  FiniteTimePlan plan;
  plan.t_star = finite_time_bound(v0, gamma, p, lambda2_b);
  if (!(tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tolerance must be positive");
  }
  // A worker pulled by a neighbor at distance z moves h s |z|^{2p-1}; it
  // overshoots once that exceeds z, so the band half-width solves
  // z = h s z^{2p-1}, i.e. z = (h s)^{1/(2-2p)}.
  const double exponent = 1.0 / (2.0 - 2.0 * p);
  for (int refinement = 1; refinement <= (1 << 24); refinement *= 2) {
    const double step = gamma / refinement;
    const double half_width = std::pow(step * max_weighted_degree, exponent);
    const double band = n * half_width * half_width;
    plan.refinement = refinement;
    plan.step_gamma = step;
    plan.predicted_band = band;
    if (band <= 0.1 * tolerance) break;
  }
  plan.round_budget = static_cast<long long>(plan.refinement) *
                      (static_cast<long long>(std::ceil(plan.t_star)) + 1);
  return plan;
}

double delay_threshold(const SpectralSummary& spectral) {
  if (!(spectral.lambda_n > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "delay threshold needs lambda_n > 0");
  }
  return std::numbers::pi / (2.0 * spectral.lambda_n);
}

SyncTrace simulate_consensus(const Population& initial, const Matrix& weights,
                             const ConsensusProtocol& protocol, int max_rounds,
                             double tolerance) {
  if (max_rounds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_rounds must be >= 1");
  }
  validate(protocol);
  int tau = 0;
  if (const auto* d = std::get_if<Delayed>(&protocol.model)) tau = d->tau;

  SyncTrace trace;
  Population current = initial;
  trace.rows.push_back({0, sync_index(current), current.mean()});
  if (trace.rows.back().v <= tolerance) return trace;

  StateHistory history(tau);
  for (int r = 0; r < max_rounds; ++r) {
    history.push(current);
    current = gossip_round(current, weights, protocol, r, &history);
    trace.rows.push_back({r + 1, sync_index(current), current.mean()});
    if (trace.rows.back().v <= tolerance) break;
  }
  return trace;
}

void write_sync_trace_csv(std::ostream& out, const SyncTrace& trace) {
  out << "round,V,mean_norm\n";
  for (const auto& row : trace.rows) {
    out << row.round << ',' << detail::format_real(row.v) << ','
        << detail::format_real(norm(row.mean)) << '\n';
  }
}

}  // namespace ngo
