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

#include "ngo/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "ngo/diagnostics.hpp"
#include "format.hpp"
#include "ngo/error.hpp"
#include "ngo/graph.hpp"
#include "ngo/rng.hpp"

namespace ngo {
namespace {

double linear_beta(const Matrix& weights, double gamma) {
  const Vector eig = symmetric_eigenvalues(laplacian(weights));
  return 1.0 - gamma * (eig.size() > 1 ? eig[1] : 0.0);
}

double distance_sq(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

// f(x) - f* without cancellation for quadratics: g*.D + D.H.D/2 with
// D = x - x*. Near the optimum the direct difference is pure rounding.
class GapEvaluator {
 public:
  explicit GapEvaluator(const Problem& problem) : problem_(problem) {
    quadratic_ = std::all_of(problem.objectives.begin(), problem.objectives.end(),
                             [](const LocalObjective& f) { return f.kind() == ObjectiveKind::kQuadratic; });
    if (!quadratic_) return;
    const std::size_t d = problem.optimum.x_star.size();
    hessian_ = Matrix(d, d);
    for (const auto& f : problem.objectives) {
      const Matrix h = f.hessian();
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) hessian_(r, c) += h(r, c) / problem.objectives.size();
    }
    grad_star_ = global_gradient(problem.objectives, problem.optimum.x_star);
  }

  double operator()(std::span<const double> x) const {
    if (!quadratic_) return global_value(problem_.objectives, x) - problem_.optimum.f_star;
    const auto& xs = problem_.optimum.x_star;
    const std::size_t d = xs.size();
    double gap = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      const double dr = x[r] - xs[r];
      double hd = 0.0;
      for (std::size_t c = 0; c < d; ++c) hd += hessian_(r, c) * (x[c] - xs[c]);
      gap += grad_star_[r] * dr + 0.5 * dr * hd;
    }
    return gap;
  }

 private:
  const Problem& problem_;
  bool quadratic_ = false;
  Matrix hessian_;
  Vector grad_star_;
};

// Running weighted average sum_{s<t} w_s xbar^s / S_t.
class AverageTracker {
 public:
  AverageTracker(const Schedule& schedule, std::size_t d)
      : schedule_(schedule), sum_(d, 0.0) {}

  Vector current(const Vector& mean_now) const {
    if (weight_ == 0.0) return mean_now;
    Vector out(sum_);
    for (double& v : out) v /= weight_;
    return out;
  }

  void add(int t, const Vector& mean) {
    const double w = schedule_.weight(t);
    for (std::size_t k = 0; k < sum_.size(); ++k) sum_[k] += w * mean[k];
    weight_ += w;
  }

 private:
  const Schedule& schedule_;
  Vector sum_;
  double weight_ = 0.0;
};

struct Setup {
  int n = 0;
  int d = 0;
  Vector x0;
};

Setup prepare(const Problem& problem, const TrainOptions& options) {
  if (problem.objectives.empty()) throw Error(ErrorCode::kNoData, "no objectives");
  if (options.rounds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one round");
  }
  if (options.batch < 0) throw Error(ErrorCode::kInvalidArgument, "batch must be >= 0");
  if (options.period < 1) {
    throw Error(ErrorCode::kInvalidArgument, "communication period must be >= 1");
  }
  Setup s;
  s.n = static_cast<int>(problem.objectives.size());
  s.d = problem.objectives.front().dim();
  s.x0 = options.x0.empty() ? Vector(s.d, 0.0) : options.x0;
  if (static_cast<int>(s.x0.size()) != s.d) {
    throw Error(ErrorCode::kShapeError, "x0 has the wrong dimension");
  }
  return s;
}

Vector worker_gradient(const Problem& problem, const TrainOptions& options,
                       int t, int i, std::span<const double> x) {
  const auto& f = problem.objectives[i];
  if (options.batch == 0) return f.full_gradient(x);
  CounterRng rng = make_stream(options.seed, Stream::kGradient, t, i);
  return f.stochastic_gradient(x, options.batch, rng);
}

RunRecord make_record(const Problem& problem, int t, double v,
                      const Vector& mean, const Vector& avg, long long comm,
                      long long bits) {
  RunRecord r;
  r.t = t;
  r.v = v;
  r.loss_gap_mean = global_value(problem.objectives, mean) - problem.optimum.f_star;
  r.loss_gap_avg = global_value(problem.objectives, avg) - problem.optimum.f_star;
  r.comm_rounds = comm;
  r.bits_sent = bits;
  return r;
}

std::vector<int> support_degrees(const Matrix& w) {
  std::vector<int> deg(w.rows(), 0);
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j)
      if (i != j && w(i, j) != 0.0) ++deg[i];
  return deg;
}

RunResult run_decentralized(const Problem& problem, const Matrix& weights,
                            const Schedule& schedule, const TrainOptions& options,
                            Algorithm algorithm, const Compressor* compressor) {
  const Setup s = prepare(problem, options);
  if (!weights.square() || static_cast<int>(weights.rows()) != s.n) {
    throw Error(ErrorCode::kShapeError,
                "weight matrix must be " + std::to_string(s.n) + "x" +
                    std::to_string(s.n));
  }
  const ConsensusProtocol& protocol = options.protocol;
  validate(protocol);
  check_stability(weights, protocol);
  check_schedule(schedule, algorithm, problem.constants,
                 linear_beta(weights, protocol.gamma), options.policy);

  const std::vector<int> degree = support_degrees(weights);
  int tau = 0;
  if (const auto* delayed = std::get_if<Delayed>(&protocol.model)) tau = delayed->tau;
  StateHistory history(tau);

  Population x(std::vector<Vector>(s.n, s.x0));
  Population xhat(s.n, s.d, 0.0);
  AverageTracker avg(schedule, s.d);
  RunResult result;
  result.records.reserve(options.rounds + 1);
  result.mean_trajectory.reserve(options.rounds + 1);
  long long comm = 0;
  long long bits = 0;

  for (int t = 0; t <= options.rounds; ++t) {
    const Vector mean = x.mean();
    result.mean_trajectory.push_back(mean);
    result.records.push_back(
        make_record(problem, t, sync_index(x), mean, avg.current(mean), comm, bits));
    if (t == options.rounds) break;
    avg.add(t, mean);

    const double eta = schedule.eta(t);
    Population half = x;
    for (int i = 0; i < s.n; ++i) {
      const Vector g = worker_gradient(problem, options, t, i, x.state(i));
      auto hi = half.state(i);
      for (int k = 0; k < s.d; ++k) hi[k] -= eta * g[k];
    }
    if ((t + 1) % options.period != 0) {
      x = std::move(half);
      continue;
    }

    const Population* source = options.couple_current_states ? &x : &half;
    if (compressor != nullptr) {
      Vector diff(s.d);
      for (int i = 0; i < s.n; ++i) {
        auto hi = half.state(i);
        auto ri = xhat.state(i);
        for (int k = 0; k < s.d; ++k) diff[k] = hi[k] - ri[k];
        CounterRng rng = make_stream(options.seed, Stream::kCompressor, t, i);
        const Compressed q = compress(*compressor, diff, rng);
        for (int k = 0; k < s.d; ++k) ri[k] += q.reconstructed[k];
        bits += q.payload.bits() * degree[i];
      }
      source = &xhat;
    }
    if (options.on_consensus_inputs) options.on_consensus_inputs(t, *source);
    if (tau > 0) {
      history.push(*source);
      source = &history.stale();
    }
    x = consensus_update(half, *source, weights, protocol, t);
    ++comm;
  }
  result.final_population = std::move(x);
  return result;
}

void append_double(std::string& out, double v) {
  out += detail::format_real(v);
}

}  // namespace

double Schedule::weight_sum(int horizon) const {
  double s = 0.0;
  for (int t = 0; t < horizon; ++t) s += weight(t);
  return s;
}

double required_offset(Algorithm algorithm, double kappa, double beta) {
  switch (algorithm) {
    case Algorithm::kCentralized:
    case Algorithm::kGossip:
    case Algorithm::kLocalSgd:
      return 16.0 * kappa;
    case Algorithm::kNgo:
    case Algorithm::kCompressedNgo:
      if (!(beta > 0.0)) {
        throw Error(ErrorCode::kScheduleConstraint,
                    "beta = 1 - gamma lambda2 must be positive, got " +
                        std::to_string(beta));
      }
      return std::max(5.0 / beta, 15.0 * kappa);
  }
  return 16.0 * kappa;
}

double default_offset(Algorithm algorithm, double kappa, double beta) {
  return std::max(required_offset(algorithm, kappa, beta), 16.0 * kappa);
}

void check_schedule(const Schedule& schedule, Algorithm algorithm,
                    const ProblemConstants& constants, double beta,
                    ConstraintPolicy policy) {
  std::string problem;
  if (!(schedule.mu > 0.0)) {
    problem = "schedule mu must be positive";
  } else {
    const double need = required_offset(algorithm, constants.kappa(), beta);
    const double eta0 = schedule.eta(0);
    const double cap = 1.0 / (4.0 * constants.l_smooth);
    if (schedule.a < need * (1.0 - 1e-12)) {
      problem = "offset a = " + std::to_string(schedule.a) + " is below " +
                std::to_string(need);
    } else if (eta0 > cap * (1.0 + 1e-12)) {
      problem = "eta_0 = " + std::to_string(eta0) + " exceeds 1/(4L) = " +
                std::to_string(cap);
    }
  }
  if (problem.empty()) return;
  if (policy == ConstraintPolicy::kRefuse) {
    throw Error(ErrorCode::kScheduleConstraint, problem);
  }
  warn(problem);
}

RunResult run_centralized(const Problem& problem, const Schedule& schedule,
                          const TrainOptions& options) {
  const Setup s = prepare(problem, options);
  check_schedule(schedule, Algorithm::kCentralized, problem.constants, 1.0,
                 options.policy);
  Vector x = s.x0;
  AverageTracker avg(schedule, s.d);
  RunResult result;
  result.records.reserve(options.rounds + 1);
  for (int t = 0; t <= options.rounds; ++t) {
    result.mean_trajectory.push_back(x);
    result.records.push_back(make_record(problem, t, 0.0, x, avg.current(x), 0, 0));
    if (t == options.rounds) break;
    avg.add(t, x);
    Vector g(s.d, 0.0);
    for (int i = 0; i < s.n; ++i) {
      const Vector gi = worker_gradient(problem, options, t, i, x);
      for (int k = 0; k < s.d; ++k) g[k] += gi[k];
    }
    const double eta = schedule.eta(t);
    for (int k = 0; k < s.d; ++k) x[k] -= eta * (g[k] / s.n);
  }
  result.final_population = Population(std::vector<Vector>{x});
  return result;
}

RunResult run_gossip_sgd(const Problem& problem, const Matrix& weights,
                         const Schedule& schedule, TrainOptions options) {
  options.protocol.p = 1.0;
  options.period = 1;
  return run_decentralized(problem, weights, schedule, options, Algorithm::kGossip,
                           nullptr);
}

RunResult run_ngo_sgd(const Problem& problem, const Matrix& weights,
                      const Schedule& schedule, const TrainOptions& options) {
  return run_decentralized(problem, weights, schedule, options, Algorithm::kNgo,
                           nullptr);
}

RunResult run_local_sgd(const Problem& problem, const Matrix& weights,
                        const Schedule& schedule, TrainOptions options) {
  options.protocol.p = 1.0;
  return run_decentralized(problem, weights, schedule, options,
                           Algorithm::kLocalSgd, nullptr);
}

RunResult run_compressed_ngo(const Problem& problem, const Matrix& weights,
                             const Schedule& schedule,
                             const TrainOptions& options,
                             const Compressor& compressor) {
  return run_decentralized(problem, weights, schedule, options,
                           Algorithm::kCompressedNgo, &compressor);
}

Vector weighted_average_iterate(const std::vector<Vector>& trajectory,
                                const Schedule& schedule, int horizon) {
  if (horizon < 1 || static_cast<std::size_t>(horizon) > trajectory.size()) {
    throw Error(ErrorCode::kIncompleteTrace,
                "horizon " + std::to_string(horizon) + " outside trajectory of " +
                    std::to_string(trajectory.size()));
  }
  Vector out(trajectory.front().size(), 0.0);
  for (int t = 0; t < horizon; ++t) {
    const double w = schedule.weight(t);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * trajectory[t][k];
  }
  const double total = schedule.weight_sum(horizon);
  for (double& v : out) v /= total;
  return out;
}

BoundReport evaluate_bound(const std::vector<RunRecord>& records,
                           const ProblemConstants& constants,
                           const Schedule& schedule, BoundVariant variant,
                           int workers, std::span<const double> x_bar0,
                           std::span<const double> x_star, int horizon,
                           std::optional<int> ngo_cutoff) {
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  if (records.size() < static_cast<std::size_t>(horizon) + 1) {
    throw Error(ErrorCode::kIncompleteTrace,
                "trace has " + std::to_string(records.size()) +
                    " rows, horizon " + std::to_string(horizon) + " needs " +
                    std::to_string(horizon + 1));
  }
  for (int t = 0; t <= horizon; ++t) {
    if (records[t].t != t || !std::isfinite(records[t].v)) {
      throw Error(ErrorCode::kIncompleteTrace,
                  "missing V value at round " + std::to_string(t));
    }
  }
  if (x_bar0.size() != x_star.size()) {
    throw Error(ErrorCode::kShapeError, "x_bar0 and x_star differ in dimension");
  }
  if (variant == BoundVariant::kNgo && !ngo_cutoff) {
    throw Error(ErrorCode::kInvalidArgument, "NGO bound needs the T* cutoff");
  }

  const double mu = constants.mu;
  const double a = schedule.a;
  const double big_t = horizon;
  const double s_t = schedule.weight_sum(horizon);
  const double n = workers;

  BoundReport r;
  r.horizon = horizon;
  r.term_init = mu * a * a * a / (8.0 * s_t) * distance_sq(x_bar0, x_star);
  r.term_variance =
      4.0 * big_t * (big_t + 2.0 * a) * constants.sigma_bar_sq / (mu * n * s_t);
  switch (variant) {
    case BoundVariant::kCentralized:
      r.sync_cutoff = 0;
      break;
    case BoundVariant::kGossip:
      r.sync_cutoff = horizon;
      break;
    case BoundVariant::kNgo:
      r.sync_cutoff = std::clamp(*ngo_cutoff, 0, horizon);
      break;
  }
  if (variant != BoundVariant::kCentralized) {
    double sum = 0.0;
    for (int t = 0; t <= r.sync_cutoff; ++t) sum += schedule.weight(t) * records[t].v;
    r.term_sync = (2.0 * constants.l_smooth + mu) / (n * s_t) * sum;
  }
  r.total = r.term_init + r.term_variance + r.term_sync;
  r.observed_gap = records[horizon].loss_gap_avg;
  return r;
}

int ngo_sync_cutoff(const std::vector<RunRecord>& records, double gamma,
                    double p, double lambda2_b) {
  double v0 = 0.0;
  for (const auto& r : records) v0 = std::max(v0, r.v);
  if (v0 == 0.0) return 0;
  return static_cast<int>(std::ceil(finite_time_bound(v0, gamma, p, lambda2_b)));
}

DescentCheck descent_check(const RunResult& result, const Problem& problem,
                           const Schedule& schedule, double sigma_bar_sq,
                           double relative_slack) {
  const auto& traj = result.mean_trajectory;
  if (traj.size() < 2 || result.records.size() != traj.size()) {
    throw Error(ErrorCode::kIncompleteTrace, "descent check needs a full run");
  }
  const double mu = problem.constants.mu;
  const double l = problem.constants.l_smooth;
  const double n = static_cast<double>(problem.objectives.size());
  const auto& x_star = problem.optimum.x_star;
  const GapEvaluator gap(problem);
  DescentCheck check;
  for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
    const double eta = schedule.eta(static_cast<int>(t));
    const double dist = distance_sq(traj[t], x_star);
    const double next = distance_sq(traj[t + 1], x_star);
    const double e_t = gap(traj[t]);
    const double v = result.records[t].v;
    const double contraction = (1.0 - mu * eta / 2.0) * dist;
    const double noise = eta * eta * sigma_bar_sq / n;
    const double sync = eta * (2.0 * eta * l * l + l * eta + mu) * v / n;
    const double rhs = contraction + noise - 2.0 * eta * (1.0 - 2.0 * l * eta) * e_t + sync;
    const double scale = std::max(contraction + noise + sync, 1e-300);
    const double excess = (next - rhs) / scale;
    ++check.rounds_checked;
    check.worst_relative_excess = std::max(check.worst_relative_excess, excess);
    if (excess > relative_slack) ++check.violations;
  }
  return check;
}

double sync_parameter(const std::vector<Vector>& grads_at_workers,
                      const std::vector<Vector>& grads_at_mean, double eta,
                      double epsilon) {
  if (grads_at_workers.size() != grads_at_mean.size() || grads_at_mean.empty()) {
    throw Error(ErrorCode::kShapeError, "gradient lists must match and be non-empty");
  }
  if (!(eta > 0.0) || !(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "need eta > 0 and epsilon in (0,1)");
  }
  const std::size_t d = grads_at_mean.front().size();
  Vector at_mean(d, 0.0);
  Vector gap(d, 0.0);
  for (std::size_t i = 0; i < grads_at_mean.size(); ++i) {
    if (grads_at_mean[i].size() != d || grads_at_workers[i].size() != d) {
      throw Error(ErrorCode::kShapeError, "gradient dimensions differ");
    }
    for (std::size_t k = 0; k < d; ++k) {
      at_mean[k] += grads_at_mean[i][k];
      gap[k] += grads_at_workers[i][k];
    }
  }
  for (std::size_t k = 0; k < d; ++k) gap[k] -= at_mean[k];
  const double den = squared_norm(gap);
  if (den == 0.0) return std::pow(eta, -epsilon);
  const double nu_sq = std::min(squared_norm(at_mean) / den, std::pow(eta, -2.0 * epsilon));
  return std::sqrt(nu_sq);
}

double sync_parameter(const Objectives& objectives,
                      const Population& population, double eta,
                      double epsilon) {
  if (static_cast<int>(objectives.size()) != population.n()) {
    throw Error(ErrorCode::kShapeError, "one objective per worker required");
  }
  const Vector mean = population.mean();
  std::vector<Vector> at_workers;
  std::vector<Vector> at_mean;
  for (int i = 0; i < population.n(); ++i) {
    at_workers.push_back(objectives[i].full_gradient(population.state(i)));
    at_mean.push_back(objectives[i].full_gradient(mean));
  }
  return sync_parameter(at_workers, at_mean, eta, epsilon);
}

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "t,V,loss_gap_mean,loss_gap_avg,comm_rounds,bits_sent\n";
  std::string line;
  for (const auto& r : records) {
    line = std::to_string(r.t) + ",";
    append_double(line, r.v);
    line += ",";
    append_double(line, r.loss_gap_mean);
    line += ",";
    append_double(line, r.loss_gap_avg);
    line += "," + std::to_string(r.comm_rounds) + "," + std::to_string(r.bits_sent) + "\n";
    out << line;
  }
}

void write_bound_text(std::ostream& out, const BoundReport& report) {
  std::string s;
  const auto field = [&](const char* key, double v) {
    s += key;
    s += " = ";
    append_double(s, v);
    s += "\n";
  };
  s += "horizon = " + std::to_string(report.horizon) + "\n";
  s += "sync_cutoff = " + std::to_string(report.sync_cutoff) + "\n";
  field("term_init", report.term_init);
  field("term_variance", report.term_variance);
  field("term_sync", report.term_sync);
  field("total", report.total);
  field("observed_gap", report.observed_gap);
  out << s;
}

void write_bound_csv(std::ostream& out, const BoundReport& report) {
  std::string s = "horizon,sync_cutoff,term_init,term_variance,term_sync,total,observed_gap\n";
  s += std::to_string(report.horizon) + "," + std::to_string(report.sync_cutoff);
  for (double v : {report.term_init, report.term_variance, report.term_sync,
                   report.total, report.observed_gap}) {
    s += ",";
    append_double(s, v);
  }
  out << s << "\n";
}

}  // namespace ngo
