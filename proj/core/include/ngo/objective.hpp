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
#include <string>
#include <vector>

#include "ngo/matrix.hpp"
#include "ngo/rng.hpp"

namespace ngo {

struct Partition;

enum class ObjectiveKind { kQuadratic, kLogistic };

/// Empirical-risk local objective f_i over the worker's own samples.
///   quadratic: f(x) = 1/(2m) ||A x - b||^2 + reg/2 ||x||^2
///   logistic:  f(x) = 1/m sum log(1 + exp(-b_k a_k^T x)) + reg/2 ||x||^2,
///              b_k in {-1, +1}
class LocalObjective {
 public:
  LocalObjective(ObjectiveKind kind, Matrix features, Vector targets,
                 double reg = 0.0);

  ObjectiveKind kind() const noexcept { return kind_; }
  int samples() const noexcept { return static_cast<int>(features_.rows()); }
  int dim() const noexcept { return static_cast<int>(features_.cols()); }
  double regularization() const noexcept { return reg_; }
  const Matrix& features() const noexcept { return features_; }
  const Vector& targets() const noexcept { return targets_; }

  double value(std::span<const double> x) const;
  Vector full_gradient(std::span<const double> x) const;

  /// Mean gradient over the listed sample indices (plus regularization).
  Vector gradient_over(std::span<const double> x,
                       std::span<const int> indices) const;

  /// Mini-batch gradient; the batch is drawn uniformly without replacement.
  /// batch == samples() returns full_gradient exactly. Throws kNoData for an
  /// empty objective and kInvalidArgument when batch exceeds the sample count.
  Vector stochastic_gradient(std::span<const double> x, int batch,
                             CounterRng& rng) const;

  /// Quadratic only: A^T A / m + reg I.
  Matrix hessian() const;

 private:
  void accumulate_sample_gradient(std::span<const double> x, int k,
                                  std::span<double> out) const;

  ObjectiveKind kind_;
  Matrix features_;
  Vector targets_;
  double reg_;
};

using Objectives = std::vector<LocalObjective>;

/// f(x) = (1/n) sum_i f_i(x)
double global_value(const Objectives& objectives, std::span<const double> x);
Vector global_gradient(const Objectives& objectives,
                       std::span<const double> x);

struct ProblemConstants {
  double mu = 0.0;
  double l_smooth = 0.0;
  // Oracle variance (1/n) sum sigma_i^2 and second-moment bound G^2; both are
  // empirical estimates (see estimate_noise), zero until estimated.
  double sigma_bar_sq = 0.0;
  double grad_bound_sq = 0.0;
  bool noise_estimated = false;
  // Ridge added to every f_i when the averaged Hessian was degenerate.
  double regularization_added = 0.0;

  double kappa() const noexcept { return l_smooth / mu; }
};

struct Optimum {
  Vector x_star;
  double f_star = 0.0;
};

/// Objectives plus everything the runners and bound evaluators need.
struct Problem {
  Objectives objectives;
  ProblemConstants constants;
  Optimum optimum;
  Vector ground_truth;
};

struct QuadraticSpec {
  int workers = 10;
  int dim = 1;
  int samples_per_worker = 50;
  std::uint64_t seed = 0;
  // 0 gives i.i.d. workers. Larger values shift each worker's feature mean
  // and its regression target, so the local optima separate.
  double heterogeneity = 0.0;
  double noise = 0.5;
};

Problem make_quadratic(const QuadraticSpec& spec);

struct LogisticSpec {
  int workers = 10;
  int dim = 5;
  int samples_per_worker = 50;
  std::uint64_t seed = 0;
  double heterogeneity = 0.0;
  double regularization = 1e-2;
};

Problem make_logistic(const LogisticSpec& spec);

/// f_i(x) = 1/2 (x - c_i)^2, one worker per center.
Problem make_scalar_quadratics(std::span<const double> centers);

/// Fills constants and optimum for externally built objectives.
Problem make_problem(Objectives objectives);

/// mu and L of the global objective. Quadratic: extreme eigenvalues of the
/// averaged Hessian. Logistic: mu = reg, L = lambda_max(A^T A)/(4m) + reg.
ProblemConstants problem_constants(const Objectives& objectives);

/// Quadratic: aggregated normal equations. Logistic: full-batch gradient
/// descent to ||grad f|| <= 1e-10 (kOptimizerFailed after 10^6 steps).
Optimum solve_optimum(const Objectives& objectives);

struct NoiseEstimate {
  double sigma_bar_sq = 0.0;
  double grad_bound_sq = 0.0;
};

/// Samples stochastic gradients at each probe point. sigma_i^2 is the worst
/// per-point mean squared deviation from the full gradient, averaged over
/// workers; G^2 is the largest sampled ||g||^2.
NoiseEstimate estimate_noise(const Objectives& objectives,
                             const std::vector<Vector>& probes, int batch,
                             int draws_per_point, std::uint64_t seed);

/// Samples with integer class labels, as loaded from CSV.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
};

/// Columns feature_0..feature_{d-1},label with a header row.
Dataset load_csv_dataset(const std::string& path);

/// Splits a dataset into per-worker objectives. Quadratic objectives regress
/// on the label value; logistic maps label > 0 to +1, else -1.
Objectives objectives_from_dataset(const Dataset& dataset,
                                   const Partition& partition,
                                   ObjectiveKind kind, double reg);

}  // namespace ngo
