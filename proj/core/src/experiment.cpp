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

#include "ngo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "ngo/consensus.hpp"
#include "ngo/diagnostics.hpp"
#include "format.hpp"
#include "ngo/error.hpp"

namespace ngo {
namespace {

namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using detail::format_real;

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

// Metropolis formula without the connectivity check, for diagnostics.
Matrix raw_metropolis(const Topology& topo) {
  const int n = topo.n();
  Matrix w(n, n);
  for (const auto& [i, j] : topo.edges()) {
    w(i, j) = w(j, i) = 1.0 / (1.0 + std::max(topo.degree(i), topo.degree(j)));
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  return w;
}

double second_eigenvalue(const Matrix& lap) {
  const Vector eig = symmetric_eigenvalues(lap);
  return eig.size() > 1 ? eig[1] : 0.0;
}

double lambda2_nonlinear(const WeightMatrix& w, double p) {
  return second_eigenvalue(laplacian(nonlinear_weight_matrix(w, p)));
}

double max_weighted_degree(const Matrix& w) {
  double worst = 0.0;
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.cols(); ++j)
      if (i != j) s += w(i, j);
    worst = std::max(worst, s);
  }
  return worst;
}

ConsensusProtocol make_protocol(const ExperimentConfig& config,
                                std::uint64_t seed) {
  ConsensusProtocol protocol;
  protocol.p = config.p;
  protocol.gamma = config.gamma;
  switch (config.comm) {
    case CommKind::kSynchronous:
      protocol.model = Synchronous{};
      break;
    case CommKind::kDelayed:
      protocol.model = Delayed{config.tau};
      break;
    case CommKind::kRandom:
      protocol.model = RandomGraph{config.u, seed};
      break;
    case CommKind::kSwitching: {
      if (config.switching.empty()) {
        throw Error(ErrorCode::kConfigError, "comm = switching needs a switching list");
      }
      Switching sw;
      sw.period = config.switch_period;
      for (auto kind : config.switching) {
        ExperimentConfig slot = config;
        slot.topology = kind;
        sw.schedule.push_back(metropolis_weights(make_topology(slot)).matrix());
      }
      protocol.model = std::move(sw);
      break;
    }
  }
  return protocol;
}

void write_summary(const fs::path& path, const SummaryRow& row) {
  auto out = open_output(path);
  out << "config_hash,final_gap_avg,first_hit,bound_total,wall_seconds\n"
      << row.config_hash << "," << format_real(row.final_gap_avg) << ","
      << row.first_hit << "," << format_real(row.bound_total) << ","
      << format_real(row.wall_seconds) << "\n";
}

SummaryRow run_pure_consensus(const ExperimentConfig& config, const fs::path& out_dir) {
  const Topology topo = make_topology(config);
  const WeightMatrix w = metropolis_weights(topo);
  ConsensusProtocol protocol = make_protocol(config, config.seed);

  std::normal_distribution<double> normal(0.0, 1.0);
  Population pop(config.workers, config.state_dim);
  for (int i = 0; i < config.workers; ++i) {
    CounterRng rng = make_stream(config.seed, Stream::kInit, 0, i);
    for (double& v : pop.state(i)) v = normal(rng);
  }
  const double v0 = sync_index(pop);
  const double target = config.tolerance * v0;

  // Finite-time coupling on the synchronous model is integrated with the
  // refined step; one trace row is still one unit of continuous time.
  int refinement = 1;
  if (config.comm == CommKind::kSynchronous && config.p < 1.0 && v0 > 0.0 &&
      config.gamma > 0.0) {
    const FiniteTimePlan plan = plan_finite_time(
        v0, config.gamma, config.p, lambda2_nonlinear(w, config.p),
        max_weighted_degree(w.matrix()), config.workers, target);
    refinement = plan.refinement;
    protocol.gamma = plan.step_gamma;
  }

  int tau = 0;
  if (const auto* d = std::get_if<Delayed>(&protocol.model)) tau = d->tau;
  StateHistory history(tau);

  SyncTrace trace;
  trace.rows.push_back({0, v0, pop.mean()});
  long long first_hit = v0 <= target ? 0 : -1;
  long long step = 0;
  for (int r = 1; r <= config.rounds; ++r) {
    for (int s = 0; s < refinement; ++s, ++step) {
      if (tau > 0) history.push(pop);
      pop = gossip_round(pop, w, protocol, static_cast<int>(step),
                         tau > 0 ? &history : nullptr);
    }
    const double v = sync_index(pop);
    trace.rows.push_back({r, v, pop.mean()});
    if (first_hit < 0 && v <= target) first_hit = r;
  }
  auto out = open_output(out_dir / "trace.csv");
  write_sync_trace_csv(out, trace);

  SummaryRow row;
  row.final_gap_avg = kNaN;
  row.first_hit = first_hit;
  row.bound_total = kNaN;
  return row;
}

Algorithm to_algorithm(ExperimentAlgorithm a) {
  switch (a) {
    case ExperimentAlgorithm::kCentralized: return Algorithm::kCentralized;
    case ExperimentAlgorithm::kGossip: return Algorithm::kGossip;
    case ExperimentAlgorithm::kLocalSgd: return Algorithm::kLocalSgd;
    case ExperimentAlgorithm::kCompressedNgo: return Algorithm::kCompressedNgo;
    default: return Algorithm::kNgo;
  }
}

SummaryRow run_training(const ExperimentConfig& config, const fs::path& out_dir) {
  Problem problem = make_problem(config, config.seed);
  const Topology topo = make_topology(config);
  const WeightMatrix w = metropolis_weights(topo);
  const double lambda2_w = second_eigenvalue(laplacian(w));
  const double beta = 1.0 - config.gamma * lambda2_w;
  const Algorithm algorithm = to_algorithm(config.algorithm);

  Schedule schedule;
  schedule.mu = problem.constants.mu;
  schedule.a = config.offset ? *config.offset
                             : default_offset(algorithm, problem.constants.kappa(), beta);

  TrainOptions options;
  options.rounds = config.rounds;
  options.batch = config.batch;
  options.seed = config.seed;
  options.protocol = make_protocol(config, config.seed);
  options.period = config.period;
  options.couple_current_states = config.couple_current_states;
  options.policy = config.policy;

  RunResult result;
  switch (config.algorithm) {
    case ExperimentAlgorithm::kCentralized:
      result = run_centralized(problem, schedule, options);
      break;
    case ExperimentAlgorithm::kGossip:
      result = run_gossip_sgd(problem, w.matrix(), schedule, options);
      break;
    case ExperimentAlgorithm::kLocalSgd:
      result = run_local_sgd(problem, w.matrix(), schedule, options);
      break;
    case ExperimentAlgorithm::kCompressedNgo:
      result = run_compressed_ngo(problem, w.matrix(), schedule, options,
                                  {config.compressor, config.compressor_k});
      break;
    default:
      result = run_ngo_sgd(problem, w.matrix(), schedule, options);
      break;
  }
  {
    auto out = open_output(out_dir / "trace.csv");
    write_records_csv(out, result.records);
  }

  SummaryRow row;
  row.final_gap_avg = result.records.back().loss_gap_avg;
  for (const auto& r : result.records) {
    if (r.loss_gap_avg <= config.tolerance) {
      row.first_hit = r.t;
      break;
    }
  }
  row.bound_total = kNaN;

  const bool has_bound = config.algorithm == ExperimentAlgorithm::kCentralized ||
                         config.algorithm == ExperimentAlgorithm::kGossip ||
                         config.algorithm == ExperimentAlgorithm::kNgo;
  if (has_bound) {
    ProblemConstants constants = problem.constants;
    if (config.batch != 0) {
      const Vector zero(problem.objectives.front().dim(), 0.0);
      const NoiseEstimate est = estimate_noise(
          problem.objectives, {zero, problem.optimum.x_star}, config.batch, 2000,
          config.seed);
      constants.sigma_bar_sq = est.sigma_bar_sq;
      constants.grad_bound_sq = est.grad_bound_sq;
      constants.noise_estimated = true;
    }
    BoundVariant variant = BoundVariant::kGossip;
    std::optional<int> cutoff;
    if (config.algorithm == ExperimentAlgorithm::kCentralized) {
      variant = BoundVariant::kCentralized;
    } else if (config.algorithm == ExperimentAlgorithm::kNgo && config.p < 1.0) {
      variant = BoundVariant::kNgo;
      cutoff = ngo_sync_cutoff(result.records, config.gamma, config.p,
                               lambda2_nonlinear(w, config.p));
    }
    const BoundReport bound =
        evaluate_bound(result.records, constants, schedule, variant,
                       static_cast<int>(problem.objectives.size()),
                       result.mean_trajectory.front(), problem.optimum.x_star,
                       config.rounds, cutoff);
    auto out = open_output(out_dir / "bound.csv");
    write_bound_csv(out, bound);
    row.bound_total = bound.total;
  }
  return row;
}

std::string axis_label(const std::string& key) {
  const auto dot = key.find('.');
  return dot == std::string::npos ? key : key.substr(dot + 1);
}

}  // namespace

Topology make_topology(const ExperimentConfig& config) {
  if (config.topology == TopologyKind::kCustom) {
    if (config.edges_file.empty()) {
      throw Error(ErrorCode::kConfigError, "topology = custom needs edges_file");
    }
    std::ifstream in(config.edges_file);
    if (!in) throw Error(ErrorCode::kIoError, "cannot open " + config.edges_file);
    Topology topo = read_edge_list(in);
    if (topo.n() != config.workers) {
      throw Error(ErrorCode::kConfigError,
                  "edges_file describes " + std::to_string(topo.n()) +
                      " workers, config has n = " + std::to_string(config.workers));
    }
    return topo;
  }
  TopologySpec spec;
  spec.kind = config.topology;
  spec.edge_probability = config.edge_probability;
  spec.seed = config.seed;
  return build_topology(spec, config.workers);
}

Problem make_problem(const ExperimentConfig& config, std::uint64_t seed) {
  if (!config.dataset.empty()) {
    const Dataset data = load_csv_dataset(config.dataset);
    PartitionScheme scheme = IidScheme{};
    if (config.partition == PartitionKind::kShards) {
      scheme = ShardScheme{config.shards_per_worker};
    } else if (config.partition == PartitionKind::kDirichlet) {
      scheme = DirichletScheme{config.dirichlet_beta};
    }
    const Partition part = partition_data(data.labels, config.workers, scheme, seed);
    return make_problem(objectives_from_dataset(data, part, config.objective,
                                                config.regularization));
  }
  if (config.objective == ObjectiveKind::kLogistic) {
    LogisticSpec spec;
    spec.workers = config.workers;
    spec.dim = config.dim;
    spec.samples_per_worker = config.samples;
    spec.seed = seed;
    spec.heterogeneity = config.heterogeneity;
    spec.regularization = config.regularization;
    return make_logistic(spec);
  }
  QuadraticSpec spec;
  spec.workers = config.workers;
  spec.dim = config.dim;
  spec.samples_per_worker = config.samples;
  spec.seed = seed;
  spec.heterogeneity = config.heterogeneity;
  spec.noise = config.noise;
  return make_quadratic(spec);
}

SummaryRow run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + out_dir.string());
  {
    auto out = open_output(out_dir / "effective_config.ini");
    out << to_config_text(config);
  }
  SummaryRow row = config.algorithm == ExperimentAlgorithm::kPureConsensus
                       ? run_pure_consensus(config, out_dir)
                       : run_training(config, out_dir);
  row.config_hash = config_hash(config);
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_summary(out_dir / "summary.csv", row);
  return row;
}

std::vector<SweepRow> run_sweep(const ParsedConfig& parsed, const fs::path& out_dir,
                                int max_threads) {
  if (!parsed.axis) {
    throw Error(ErrorCode::kConfigError, "sweep needs exactly one list-valued key");
  }
  const SweepAxis& axis = *parsed.axis;
  const ExperimentConfig& base = parsed.config;
  const int repeats = base.repeats;
  const std::string label = axis_label(axis.key);

  struct Task {
    std::size_t value;
    int repeat;
    ExperimentConfig config;
    fs::path dir;
  };
  std::vector<Task> tasks;
  for (std::size_t v = 0; v < axis.values.size(); ++v) {
    for (int r = 0; r < repeats; ++r) {
      ExperimentConfig cfg = with_axis_value(base, axis.key, axis.values[v]);
      cfg.seed = base.seed + static_cast<std::uint64_t>(r);
      cfg.repeats = 1;
      const fs::path dir =
          out_dir / (label + "=" + axis.values[v]) / ("seed_" + std::to_string(cfg.seed));
      tasks.push_back({v, r, std::move(cfg), dir});
    }
  }

  std::vector<SummaryRow> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      try {
        results[k] = run_experiment(tasks[k].config, tasks[k].dir);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int threads =
      std::clamp(max_threads, 1, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<SweepRow> rows;
  for (std::size_t v = 0; v < axis.values.size(); ++v) {
    SweepRow row;
    row.value = axis.values[v];
    ExperimentConfig cfg = with_axis_value(base, axis.key, axis.values[v]);
    row.summary.config_hash = config_hash(cfg);
    row.summary.final_gap_avg = 0.0;
    row.summary.bound_total = 0.0;
    row.summary.first_hit = 0;
    bool missed = false;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      if (tasks[k].value != v) continue;
      const SummaryRow& s = results[k];
      row.summary.final_gap_avg += s.final_gap_avg / repeats;
      row.summary.bound_total += s.bound_total / repeats;
      row.summary.wall_seconds += s.wall_seconds;
      if (s.first_hit < 0) missed = true;
      row.summary.first_hit = std::max(row.summary.first_hit, s.first_hit);
    }
    if (missed) row.summary.first_hit = -1;
    rows.push_back(std::move(row));
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  auto out = open_output(out_dir / "summary.csv");
  out << label << ",config_hash,final_gap_avg,first_hit,bound_total,wall_seconds\n";
  for (const auto& row : rows) {
    out << row.value << "," << row.summary.config_hash << ","
        << format_real(row.summary.final_gap_avg) << "," << row.summary.first_hit
        << "," << format_real(row.summary.bound_total) << ","
        << format_real(row.summary.wall_seconds) << "\n";
  }
  return rows;
}

SpectraReport compute_spectra(const ExperimentConfig& config, double v0) {
  const Topology topo = make_topology(config);
  SpectraReport r;
  r.n = topo.n();
  r.max_degree = topo.max_degree();
  r.connected = topo.is_connected();
  const Matrix w = raw_metropolis(topo);
  const Vector eig = symmetric_eigenvalues(laplacian(w));
  r.lambda2_w = eig.size() > 1 ? eig[1] : 0.0;
  r.lambda_n_w = eig.back();
  const Vector eig_unweighted = symmetric_eigenvalues(laplacian(adjacency_matrix(topo)));
  r.delay_threshold = r.lambda_n_w > 0.0 ? std::numbers::pi / (2.0 * r.lambda_n_w) : kNaN;
  r.delay_threshold_unweighted = eig_unweighted.back() > 0.0
                                     ? std::numbers::pi / (2.0 * eig_unweighted.back())
                                     : kNaN;
  r.t_star = kNaN;
  if (!r.connected) {
    r.lambda2_w = 0.0;
    r.lambda2_b = 0.0;
    warn("topology is disconnected; lambda2 = 0 and no consensus is possible");
    return r;
  }
  const WeightMatrix wm(w, &topo);
  r.lambda2_b = lambda2_nonlinear(wm, config.p);
  if (config.p < 1.0 && r.lambda2_b > 0.0 && config.gamma > 0.0) {
    r.t_star = finite_time_bound(v0, config.gamma, config.p, r.lambda2_b);
  }
  return r;
}

void write_spectra(std::ostream& out, const SpectraReport& r, bool csv) {
  if (csv) {
    out << "n,max_degree,lambda2_w,lambda_n_w,lambda2_b,t_star,delay_threshold,"
           "delay_threshold_unweighted,connected\n"
        << r.n << "," << r.max_degree << "," << format_real(r.lambda2_w) << ","
        << format_real(r.lambda_n_w) << "," << format_real(r.lambda2_b) << ","
        << format_real(r.t_star) << "," << format_real(r.delay_threshold) << ","
        << format_real(r.delay_threshold_unweighted) << ","
        << (r.connected ? "true" : "false") << "\n";
    return;
  }
  out << "n = " << r.n << "\n"
      << "max_degree = " << r.max_degree << "\n"
      << "lambda2_w = " << format_real(r.lambda2_w) << "\n"
      << "lambda_n_w = " << format_real(r.lambda_n_w) << "\n"
      << "lambda2_b = " << format_real(r.lambda2_b) << "\n"
      << "t_star = " << format_real(r.t_star) << "\n"
      << "delay_threshold = " << format_real(r.delay_threshold) << "\n"
      << "delay_threshold_unweighted = " << format_real(r.delay_threshold_unweighted)
      << "\n"
      << "connected = " << (r.connected ? "true" : "false") << "\n";
}

}  // namespace ngo
