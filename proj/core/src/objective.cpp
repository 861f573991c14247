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

#include "ngo/objective.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "ngo/error.hpp"
#include "ngo/partition.hpp"

namespace ngo {
namespace {

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void require_dim(std::span<const double> x, int d) {
  if (static_cast<int>(x.size()) != d) {
    throw Error(ErrorCode::kShapeError, "point has dimension " +
                                            std::to_string(x.size()) +
                                            ", objective expects " +
                                            std::to_string(d));
  }
}

Matrix gram(const Matrix& a, double scale) {
  const std::size_t d = a.cols();
  Matrix g(d, d);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = a.row(r);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) g(i, j) += row[i] * row[j];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g(i, j) *= scale;
  return g;
}

Objectives with_extra_ridge(const Objectives& objectives, double ridge) {
  Objectives out;
  out.reserve(objectives.size());
  for (const auto& f : objectives) {
    out.emplace_back(f.kind(), f.features(), f.targets(),
                     f.regularization() + ridge);
  }
  return out;
}

}  // namespace

LocalObjective::LocalObjective(ObjectiveKind kind, Matrix features,
                               Vector targets, double reg)
    : kind_(kind),
      features_(std::move(features)),
      targets_(std::move(targets)),
      reg_(reg) {
  if (targets_.size() != features_.rows()) {
    throw Error(ErrorCode::kShapeError, "one target per sample required");
  }
  if (features_.cols() < 1) {
    throw Error(ErrorCode::kShapeError, "objective dimension must be >= 1");
  }
  if (reg_ < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "regularization must be >= 0");
  }
  if (kind_ == ObjectiveKind::kLogistic) {
    for (double b : targets_) {
      if (b != 1.0 && b != -1.0) {
        throw Error(ErrorCode::kInvalidArgument, "logistic labels must be +-1");
      }
    }
  }
}

double LocalObjective::value(std::span<const double> x) const {
  require_dim(x, dim());
  const int m = samples();
  if (m == 0) throw Error(ErrorCode::kNoData, "objective has no samples");
  double loss = 0.0;
  for (int k = 0; k < m; ++k) {
    const double z = dot(features_.row(k), x);
    if (kind_ == ObjectiveKind::kQuadratic) {
      const double r = z - targets_[k];
      loss += 0.5 * r * r;
    } else {
      loss += softplus(-targets_[k] * z);
    }
  }
  return loss / m + 0.5 * reg_ * squared_norm(x);
}

void LocalObjective::accumulate_sample_gradient(std::span<const double> x,
                                                int k,
                                                std::span<double> out) const {
  auto a = features_.row(k);
  const double z = dot(a, x);
  double coeff = 0.0;
  if (kind_ == ObjectiveKind::kQuadratic) {
    coeff = z - targets_[k];
  } else {
    const double b = targets_[k];
    coeff = -b * sigmoid(-b * z);
  }
  for (std::size_t j = 0; j < a.size(); ++j) out[j] += coeff * a[j];
}

Vector LocalObjective::gradient_over(std::span<const double> x,
                                     std::span<const int> indices) const {
  require_dim(x, dim());
  if (samples() == 0) throw Error(ErrorCode::kNoData, "objective has no samples");
  if (indices.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty sample set");
  }
  Vector g(dim(), 0.0);
  for (int k : indices) {
    if (k < 0 || k >= samples()) {
      throw Error(ErrorCode::kInvalidArgument, "sample index out of range");
    }
    accumulate_sample_gradient(x, k, g);
  }
  const double inv = 1.0 / static_cast<double>(indices.size());
  for (int j = 0; j < dim(); ++j) g[j] = g[j] * inv + reg_ * x[j];
  return g;
}

Vector LocalObjective::full_gradient(std::span<const double> x) const {
  std::vector<int> all(samples());
  std::iota(all.begin(), all.end(), 0);
  if (all.empty()) throw Error(ErrorCode::kNoData, "objective has no samples");
  return gradient_over(x, all);
}

Vector LocalObjective::stochastic_gradient(std::span<const double> x, int batch,
                                           CounterRng& rng) const {
  const int m = samples();
  if (m == 0) throw Error(ErrorCode::kNoData, "objective has no samples");
  if (batch < 1 || batch > m) {
    throw Error(ErrorCode::kInvalidArgument,
                "batch must be in [1, " + std::to_string(m) + "]");
  }
  if (batch == m) return full_gradient(x);
  // Partial Fisher-Yates: the first batch slots become a uniform sample
  // without replacement.
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  for (int s = 0; s < batch; ++s) {
    const auto pick = s + static_cast<int>(uniform_index(rng, m - s));
    std::swap(idx[s], idx[pick]);
  }
  return gradient_over(x, std::span<const int>(idx.data(), batch));
}

Matrix LocalObjective::hessian() const {
  if (kind_ != ObjectiveKind::kQuadratic) {
    throw Error(ErrorCode::kInvalidArgument, "constant Hessian needs a quadratic");
  }
  if (samples() == 0) throw Error(ErrorCode::kNoData, "objective has no samples");
  Matrix h = gram(features_, 1.0 / samples());
  for (int i = 0; i < dim(); ++i) h(i, i) += reg_;
  return h;
}

double global_value(const Objectives& objectives, std::span<const double> x) {
  double s = 0.0;
  for (const auto& f : objectives) s += f.value(x);
  return s / static_cast<double>(objectives.size());
}

Vector global_gradient(const Objectives& objectives,
                       std::span<const double> x) {
  Vector g(x.size(), 0.0);
  for (const auto& f : objectives) {
    const Vector gi = f.full_gradient(x);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += gi[j];
  }
  for (double& v : g) v /= static_cast<double>(objectives.size());
  return g;
}

ProblemConstants problem_constants(const Objectives& objectives) {
  if (objectives.empty()) throw Error(ErrorCode::kNoData, "no objectives");
  const int d = objectives.front().dim();
  Matrix lower(d, d);
  Matrix upper(d, d);
  const double inv_n = 1.0 / static_cast<double>(objectives.size());
  for (const auto& f : objectives) {
    if (f.dim() != d) throw Error(ErrorCode::kShapeError, "objective dims differ");
    if (f.samples() == 0) throw Error(ErrorCode::kNoData, "worker without samples");
    const Matrix g = gram(f.features(), 1.0 / f.samples());
    // Logistic curvature lies between 0 and A^T A / (4m).
    const bool quad = f.kind() == ObjectiveKind::kQuadratic;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        upper(i, j) += inv_n * (quad ? g(i, j) : 0.25 * g(i, j));
        if (quad) lower(i, j) += inv_n * g(i, j);
      }
      upper(i, i) += inv_n * f.regularization();
      lower(i, i) += inv_n * f.regularization();
    }
  }
  ProblemConstants c;
  c.mu = symmetric_eigenvalues(lower).front();
  c.l_smooth = symmetric_eigenvalues(upper).back();
  return c;
}

Optimum solve_optimum(const Objectives& objectives) {
  if (objectives.empty()) throw Error(ErrorCode::kNoData, "no objectives");
  const int d = objectives.front().dim();
  const bool all_quadratic =
      std::all_of(objectives.begin(), objectives.end(), [](const auto& f) {
        return f.kind() == ObjectiveKind::kQuadratic;
      });
  Optimum opt;
  if (all_quadratic) {
    Matrix lhs(d, d);
    Vector rhs(d, 0.0);
    const double inv_n = 1.0 / static_cast<double>(objectives.size());
    for (const auto& f : objectives) {
      const Matrix h = f.hessian();
      const double inv_m = 1.0 / f.samples();
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) lhs(i, j) += inv_n * h(i, j);
      for (int k = 0; k < f.samples(); ++k) {
        auto a = f.features().row(k);
        for (int i = 0; i < d; ++i) rhs[i] += inv_n * inv_m * a[i] * f.targets()[k];
      }
    }
    opt.x_star = solve_linear(lhs, rhs);
  } else {
    const ProblemConstants c = problem_constants(objectives);
    if (!(c.mu > 0.0)) {
      throw Error(ErrorCode::kOptimizerFailed, "global objective is not strongly convex");
    }
    const double step = 1.0 / c.l_smooth;
    Vector x(d, 0.0);
    bool converged = false;
    for (int it = 0; it < 1'000'000; ++it) {
      const Vector g = global_gradient(objectives, x);
      if (norm(g) <= 1e-10) {
        converged = true;
        break;
      }
      for (int j = 0; j < d; ++j) x[j] -= step * g[j];
    }
    if (!converged) {
      throw Error(ErrorCode::kOptimizerFailed, "gradient descent did not reach 1e-10");
    }
    opt.x_star = std::move(x);
  }
  opt.f_star = global_value(objectives, opt.x_star);
  return opt;
}

Problem make_problem(Objectives objectives) {
  Problem problem;
  problem.constants = problem_constants(objectives);
  if (problem.constants.mu < 1e-10) {
    constexpr double kRidge = 1e-6;
    objectives = with_extra_ridge(objectives, kRidge);
    problem.constants = problem_constants(objectives);
    problem.constants.regularization_added = kRidge;
  }
  problem.optimum = solve_optimum(objectives);
  problem.objectives = std::move(objectives);
  return problem;
}

Problem make_quadratic(const QuadraticSpec& spec) {
  if (spec.workers < 1 || spec.dim < 1 || spec.samples_per_worker < 1) {
    throw Error(ErrorCode::kInvalidArgument, "quadratic spec needs positive sizes");
  }
  if (spec.heterogeneity < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "heterogeneity must be >= 0");
  }
  const int d = spec.dim;
  std::normal_distribution<double> normal(0.0, 1.0);
  CounterRng truth_rng = make_stream(spec.seed, Stream::kData, 0, 0);
  Vector truth(d);
  for (double& v : truth) v = normal(truth_rng);

  Objectives objectives;
  for (int i = 0; i < spec.workers; ++i) {
    CounterRng rng = make_stream(spec.seed, Stream::kData, 1, i);
    Vector shift(d);
    Vector model(d);
    for (double& v : shift) v = spec.heterogeneity * normal(rng);
    for (int j = 0; j < d; ++j) model[j] = truth[j] + spec.heterogeneity * normal(rng);
    Matrix a(spec.samples_per_worker, d);
    Vector b(spec.samples_per_worker);
    for (int k = 0; k < spec.samples_per_worker; ++k) {
      for (int j = 0; j < d; ++j) a(k, j) = shift[j] + normal(rng);
      b[k] = dot(a.row(k), model) + spec.noise * normal(rng);
    }
    objectives.emplace_back(ObjectiveKind::kQuadratic, std::move(a), std::move(b));
  }
  Problem problem = make_problem(std::move(objectives));
  problem.ground_truth = std::move(truth);
  return problem;
}

Problem make_logistic(const LogisticSpec& spec) {
  if (spec.workers < 1 || spec.dim < 1 || spec.samples_per_worker < 1) {
    throw Error(ErrorCode::kInvalidArgument, "logistic spec needs positive sizes");
  }
  const int d = spec.dim;
  std::normal_distribution<double> normal(0.0, 1.0);
  CounterRng truth_rng = make_stream(spec.seed, Stream::kData, 0, 0);
  Vector truth(d);
  for (double& v : truth) v = normal(truth_rng);

  Objectives objectives;
  for (int i = 0; i < spec.workers; ++i) {
    CounterRng rng = make_stream(spec.seed, Stream::kData, 1, i);
    Vector shift(d);
    for (double& v : shift) v = spec.heterogeneity * normal(rng);
    Matrix a(spec.samples_per_worker, d);
    Vector b(spec.samples_per_worker);
    for (int k = 0; k < spec.samples_per_worker; ++k) {
      for (int j = 0; j < d; ++j) a(k, j) = shift[j] + normal(rng);
      const double prob = sigmoid(dot(a.row(k), truth));
      b[k] = rng.uniform() < prob ? 1.0 : -1.0;
    }
    objectives.emplace_back(ObjectiveKind::kLogistic, std::move(a), std::move(b),
                            spec.regularization);
  }
  Problem problem = make_problem(std::move(objectives));
  problem.ground_truth = std::move(truth);
  return problem;
}

Problem make_scalar_quadratics(std::span<const double> centers) {
  Objectives objectives;
  for (double c : centers) {
    objectives.emplace_back(ObjectiveKind::kQuadratic, Matrix{{1.0}}, Vector{c});
  }
  return make_problem(std::move(objectives));
}

NoiseEstimate estimate_noise(const Objectives& objectives,
                             const std::vector<Vector>& probes, int batch,
                             int draws_per_point, std::uint64_t seed) {
  NoiseEstimate est;
  if (objectives.empty() || probes.empty() || draws_per_point < 1) return est;
  double sigma_sum = 0.0;
  for (std::size_t i = 0; i < objectives.size(); ++i) {
    const auto& f = objectives[i];
    const int b = batch <= 0 ? f.samples() : std::min(batch, f.samples());
    double sigma_i = 0.0;
    for (std::size_t q = 0; q < probes.size(); ++q) {
      const Vector full = f.full_gradient(probes[q]);
      CounterRng rng = make_stream(seed, Stream::kNoiseEstimate, q, i);
      double dev = 0.0;
      for (int s = 0; s < draws_per_point; ++s) {
        const Vector g = f.stochastic_gradient(probes[q], b, rng);
        double diff = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
          diff += (g[j] - full[j]) * (g[j] - full[j]);
        }
        dev += diff;
        est.grad_bound_sq = std::max(est.grad_bound_sq, squared_norm(g));
      }
      sigma_i = std::max(sigma_i, dev / draws_per_point);
    }
    sigma_sum += sigma_i;
  }
  est.sigma_bar_sq = sigma_sum / static_cast<double>(objectives.size());
  return est;
}

Dataset load_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open dataset " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kIoError, "empty dataset " + path);

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) header.push_back(col);
  }
  if (header.size() < 2 || header.back() != "label") {
    throw Error(ErrorCode::kIoError, "dataset header must end with 'label'");
  }
  const int d = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < d; ++j) {
    if (header[j] != "feature_" + std::to_string(j)) {
      throw Error(ErrorCode::kIoError, "expected column feature_" + std::to_string(j));
    }
  }

  std::vector<double> values;
  std::vector<int> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        if (col < d) {
          values.push_back(std::stod(cell, &used));
        } else if (col == d) {
          labels.push_back(std::stoi(cell, &used));
        }
      } catch (const std::exception&) {
        throw Error(ErrorCode::kIoError,
                    path + ":" + std::to_string(line_no) + ": bad value '" + cell + "'");
      }
      ++col;
    }
    if (col != d + 1) {
      throw Error(ErrorCode::kIoError,
                  path + ":" + std::to_string(line_no) + ": wrong column count");
    }
  }
  Dataset ds;
  ds.features = Matrix(labels.size(), d);
  for (std::size_t r = 0; r < labels.size(); ++r)
    for (int j = 0; j < d; ++j) ds.features(r, j) = values[r * d + j];
  ds.labels = std::move(labels);
  return ds;
}

Objectives objectives_from_dataset(const Dataset& dataset,
                                   const Partition& partition,
                                   ObjectiveKind kind, double reg) {
  if (partition.assignment.size() != dataset.labels.size()) {
    throw Error(ErrorCode::kShapeError, "partition does not cover the dataset");
  }
  Objectives objectives;
  const std::size_t d = dataset.features.cols();
  for (int w = 0; w < partition.workers; ++w) {
    const std::vector<int> rows = partition.members(w);
    Matrix a(rows.size(), d);
    Vector b(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto src = dataset.features.row(rows[r]);
      std::copy(src.begin(), src.end(), a.row(r).begin());
      const int label = dataset.labels[rows[r]];
      b[r] = kind == ObjectiveKind::kQuadratic ? static_cast<double>(label)
                                               : (label > 0 ? 1.0 : -1.0);
    }
    objectives.emplace_back(kind, std::move(a), std::move(b), reg);
  }
  return objectives;
}

}  // namespace ngo
