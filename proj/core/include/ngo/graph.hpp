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
#include <iosfwd>
#include <utility>
#include <vector>

#include "ngo/matrix.hpp"

namespace ngo {

class CounterRng;

using Edge = std::pair<int, int>;

/// Undirected simple graph on nodes [0, n). Edges are stored normalized
/// (first < second) and sorted.
class Topology {
 public:
  /// Validates and normalizes the edge list. Throws kInvalidSize for n < 2,
  /// kInvalidEdge for self-loops, duplicates or out-of-range endpoints.
  Topology(int n, std::vector<Edge> edges);

  static Topology ring(int n);
  static Topology complete(int n);
  /// One G(n, u) draw: each pair included independently with probability u.
  /// May be disconnected.
  static Topology erdos_renyi_draw(int n, double u, CounterRng& rng);
  /// Rejection-samples G(n, u) until connected (up to 1000 attempts).
  static Topology erdos_renyi(int n, double u, std::uint64_t seed);

  int n() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adjacency_[i]; }
  int degree(int i) const { return static_cast<int>(adjacency_[i].size()); }
  int max_degree() const;
  bool has_edge(int i, int j) const;

  /// BFS from node 0 reaches every node.
  bool is_connected() const;

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

enum class TopologyKind { kRing, kComplete, kErdosRenyi, kCustom };

struct TopologySpec {
  TopologyKind kind = TopologyKind::kRing;
  double edge_probability = 0.5;  // erdos_renyi only
  std::uint64_t seed = 0;         // erdos_renyi only
  std::vector<Edge> edges;        // custom only
};

Topology build_topology(const TopologySpec& spec, int n);

/// Text edge-list: "n <count>" then one "i j" pair per line.
void write_edge_list(std::ostream& out, const Topology& topology);
Topology read_edge_list(std::istream& in);

/// Symmetric doubly stochastic mixing matrix with support on the topology
/// plus the diagonal.
class WeightMatrix {
 public:
  /// Throws kAsymmetricMatrix unless W == W^T exactly, kInvalidArgument when
  /// a row sum is off by more than 1e-12, an entry leaves [0, 1], or (when a
  /// topology is given) an off-edge entry is nonzero.
  explicit WeightMatrix(Matrix w, const Topology* support = nullptr);

  int n() const noexcept { return static_cast<int>(w_.rows()); }
  double operator()(int i, int j) const noexcept { return w_(i, j); }
  const Matrix& matrix() const noexcept { return w_; }

 private:
  Matrix w_;
};

/// W_ij = 1 / (1 + max(deg_i, deg_j)) on edges, W_ii fills the row to one.
/// Throws kNotConnected for a disconnected topology.
WeightMatrix metropolis_weights(const Topology& topology);

/// 0/1 adjacency, used for unweighted Laplacians (D - A).
Matrix adjacency_matrix(const Topology& topology);

/// L = D - M with D_ii = sum_j M_ij. For a doubly stochastic W this is I - W;
/// for B = [W_ij^{1/p}] it is the Laplacian of the reweighted graph.
Matrix laplacian(const Matrix& weights);
inline Matrix laplacian(const WeightMatrix& w) { return laplacian(w.matrix()); }

struct SpectralSummary {
  Vector eigenvalues;  // ascending
  double lambda2 = 0.0;
  double lambda_n = 0.0;
  int max_degree = 0;
};

SpectralSummary spectral_summary(const Matrix& laplacian_matrix,
                                 const Topology& topology);

/// B_ij = W_ij^{1/p}. p must lie in [1/2, 1]; p = 1 is accepted for
/// diagnostics and returns W itself.
Matrix nonlinear_weight_matrix(const WeightMatrix& w, double p);

/// Discrete linear consensus is stable for 0 < gamma < 1 / max degree.
bool rate_is_stable(double gamma, int max_degree);

}  // namespace ngo
