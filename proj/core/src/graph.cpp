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

#include "ngo/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>

#include "ngo/error.hpp"
#include "ngo/rng.hpp"

namespace ngo {

Topology::Topology(int n, std::vector<Edge> edges) : n_(n) {
  if (n < 2) {
    throw Error(ErrorCode::kInvalidSize, "need at least 2 nodes, got " +
                                             std::to_string(n));
  }
  for (auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw Error(ErrorCode::kInvalidEdge, "edge (" + std::to_string(i) + "," +
                                               std::to_string(j) +
                                               ") out of range");
    }
    if (i == j) {
      throw Error(ErrorCode::kInvalidEdge,
                  "self-loop at node " + std::to_string(i));
    }
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw Error(ErrorCode::kInvalidEdge, "duplicate edge");
  }
  edges_ = std::move(edges);
  adjacency_.assign(n, {});
  for (const auto& [i, j] : edges_) {
    adjacency_[i].push_back(j);
    adjacency_[j].push_back(i);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

Topology Topology::ring(int n) {
  if (n < 2) {
    throw Error(ErrorCode::kInvalidSize, "ring needs n >= 2");
  }
  std::vector<Edge> edges;
  // n = 2 closes onto the same pair, so it is a single edge.
  const int count = n == 2 ? 1 : n;
  for (int i = 0; i < count; ++i) edges.emplace_back(i, (i + 1) % n);
  return Topology(n, std::move(edges));
}

Topology Topology::complete(int n) {
  if (n < 2) {
    throw Error(ErrorCode::kInvalidSize, "complete graph needs n >= 2");
  }
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Topology(n, std::move(edges));
}

Topology Topology::erdos_renyi_draw(int n, double u, CounterRng& rng) {
  if (n < 2) {
    throw Error(ErrorCode::kInvalidSize, "G(n,u) needs n >= 2");
  }
  if (!(u > 0.0 && u <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "edge probability must be in (0,1]");
  }
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < u) edges.emplace_back(i, j);
  return Topology(n, std::move(edges));
}

Topology Topology::erdos_renyi(int n, double u, std::uint64_t seed) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    CounterRng rng = make_stream(seed, Stream::kTopology, attempt, 0);
    Topology t = erdos_renyi_draw(n, u, rng);
    if (t.is_connected()) return t;
  }
  throw Error(ErrorCode::kNotConnected,
              "no connected G(n,u) draw in 1000 attempts");
}

int Topology::max_degree() const {
  int d = 0;
  for (const auto& nbrs : adjacency_) d = std::max(d, static_cast<int>(nbrs.size()));
  return d;
}

bool Topology::has_edge(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) return false;
  const auto& nbrs = adjacency_[i];
  return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

bool Topology::is_connected() const {
  std::vector<char> seen(n_, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int w : adjacency_[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        frontier.push(w);
      }
    }
  }
  return reached == n_;
}

Topology build_topology(const TopologySpec& spec, int n) {
  switch (spec.kind) {
    case TopologyKind::kRing: return Topology::ring(n);
    case TopologyKind::kComplete: return Topology::complete(n);
    case TopologyKind::kErdosRenyi:
      if (n < 2) throw Error(ErrorCode::kInvalidSize, "G(n,u) needs n >= 2");
      return Topology::erdos_renyi(n, spec.edge_probability, spec.seed);
    case TopologyKind::kCustom: return Topology(n, spec.edges);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown topology kind");
}

void write_edge_list(std::ostream& out, const Topology& topology) {
  out << "n " << topology.n() << '\n';
  for (const auto& [i, j] : topology.edges()) out << i << ' ' << j << '\n';
}

Topology read_edge_list(std::istream& in) {
  std::string line;
  int n = -1;
  std::vector<Edge> edges;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    if (n < 0) {
      std::string tag;
      if (!(fields >> tag >> n) || tag != "n") {
        throw Error(ErrorCode::kIoError,
                    "edge list must start with 'n <count>' (line " +
                        std::to_string(line_no) + ")");
      }
      continue;
    }
    int i = 0;
    int j = 0;
    if (!(fields >> i >> j)) {
      throw Error(ErrorCode::kIoError,
                  "malformed edge at line " + std::to_string(line_no));
    }
    edges.emplace_back(i, j);
  }
  if (n < 0) throw Error(ErrorCode::kIoError, "empty edge list");
  return Topology(n, std::move(edges));
}

WeightMatrix::WeightMatrix(Matrix w, const Topology* support) : w_(std::move(w)) {
  if (!w_.square() || w_.rows() < 1) {
    throw Error(ErrorCode::kShapeError, "weight matrix must be square");
  }
  if (w_.asymmetry() != 0.0) {
    throw Error(ErrorCode::kAsymmetricMatrix, "weight matrix must equal its transpose");
  }
  const std::size_t n = w_.rows();
  if (support && support->n() != static_cast<int>(n)) {
    throw Error(ErrorCode::kShapeError, "weight matrix / topology size mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = w_(i, j);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "weight outside [0,1]");
      }
      if (support && i != j && v > 0.0 &&
          !support->has_edge(static_cast<int>(i), static_cast<int>(j))) {
        throw Error(ErrorCode::kInvalidArgument, "positive weight off the topology");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) >= 1e-12) {
      throw Error(ErrorCode::kInvalidArgument,
                  "row " + std::to_string(i) + " does not sum to one");
    }
  }
}

WeightMatrix metropolis_weights(const Topology& topology) {
  if (!topology.is_connected()) {
    throw Error(ErrorCode::kNotConnected, "mixing weights need a connected graph");
  }
  const int n = topology.n();
  Matrix w(n, n);
  for (const auto& [i, j] : topology.edges()) {
    const double v =
        1.0 / (1.0 + std::max(topology.degree(i), topology.degree(j)));
    w(i, j) = v;
    w(j, i) = v;
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j : topology.neighbors(i)) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  return WeightMatrix(std::move(w), &topology);
}

Matrix adjacency_matrix(const Topology& topology) {
  Matrix a(topology.n(), topology.n());
  for (const auto& [i, j] : topology.edges()) a(i, j) = a(j, i) = 1.0;
  return a;
}

Matrix laplacian(const Matrix& weights) {
  if (!weights.square()) {
    throw Error(ErrorCode::kShapeError, "laplacian of a non-square matrix");
  }
  const std::size_t n = weights.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double degree = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      degree += weights(i, j);
      l(i, j) = -weights(i, j);
    }
    l(i, i) += degree;
  }
  return l;
}

SpectralSummary spectral_summary(const Matrix& laplacian_matrix,
                                 const Topology& topology) {
  if (static_cast<int>(laplacian_matrix.rows()) != topology.n()) {
    throw Error(ErrorCode::kShapeError, "laplacian / topology size mismatch");
  }
  SpectralSummary s;
  s.eigenvalues = symmetric_eigenvalues(laplacian_matrix);
  s.lambda2 = s.eigenvalues.size() > 1 ? s.eigenvalues[1] : 0.0;
  s.lambda_n = s.eigenvalues.back();
  s.max_degree = topology.max_degree();
  return s;
}

Matrix nonlinear_weight_matrix(const WeightMatrix& w, double p) {
  if (!(p >= 0.5 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidExponent, "p must lie in [1/2, 1]");
  }
  Matrix b = w.matrix();
  if (p == 1.0) return b;
  const double power = 1.0 / p;
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      b(i, j) = b(i, j) == 0.0 ? 0.0 : std::pow(b(i, j), power);
  return b;
}

bool rate_is_stable(double gamma, int max_degree) {
  return gamma > 0.0 && max_degree > 0 && gamma * max_degree < 1.0;
}

}  // namespace ngo
