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

// Test-only reference computations. Nothing here calls into the library
// code under test, so each oracle is an independent check.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using Sym3 = std::array<std::array<int, 3>, 3>;

// det(lambda I - A) = lambda^3 + c[0] lambda^2 + c[1] lambda + c[2]
inline std::array<long long, 3> charpoly3(const Sym3& a) {
  const long long tr = a[0][0] + a[1][1] + a[2][2];
  const long long minors = static_cast<long long>(a[0][0]) * a[1][1] - a[0][1] * a[1][0] +
                           static_cast<long long>(a[0][0]) * a[2][2] - a[0][2] * a[2][0] +
                           static_cast<long long>(a[1][1]) * a[2][2] - a[1][2] * a[2][1];
  const long long det =
      static_cast<long long>(a[0][0]) * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
      static_cast<long long>(a[0][1]) * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
      static_cast<long long>(a[0][2]) * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  return {-tr, minors, -det};
}

inline long long cubic_discriminant(const std::array<long long, 3>& c) {
  const long long b = c[0], k = c[1], d = c[2];
  return 18 * b * k * d - 4 * b * b * b * d + b * b * k * k - 4 * k * k * k - 27 * d * d;
}

inline long double eval_cubic(const std::array<long long, 3>& c, long double x) {
  return ((x + c[0]) * x + c[1]) * x + c[2];
}

// Real roots of a monic integer cubic known to have three real roots,
// ascending. A zero discriminant means a repeated root, which must be an
// integer for a monic integer polynomial; those are found exactly.
inline std::array<long double, 3> cubic_roots(const std::array<long long, 3>& c) {
  if (cubic_discriminant(c) == 0) {
    const long long bound = 1 + std::max({std::llabs(c[0]), std::llabs(c[1]), std::llabs(c[2])});
    std::vector<long long> roots;
    for (long long r = -bound; r <= bound; ++r) {
      // Synthetic division by (lambda - r) leaves lambda^2 + q1 lambda + q2.
      const long long q1 = c[0] + r;
      const long long q2 = c[1] + r * q1;
      if (c[2] + r * q2 != 0) continue;
      const long long disc = q1 * q1 - 4 * q2;
      const auto s = static_cast<long long>(std::llround(std::sqrt(static_cast<long double>(disc))));
      roots = {r, (-q1 - s) / 2, (-q1 + s) / 2};
      break;
    }
    std::sort(roots.begin(), roots.end());
    return {static_cast<long double>(roots[0]), static_cast<long double>(roots[1]),
            static_cast<long double>(roots[2])};
  }
  // Depressed cubic t^3 + P t + Q with lambda = t - b/3.
  const long double b = c[0], k = c[1], d = c[2];
  const long double p = k - b * b / 3.0L;
  const long double q = 2.0L * b * b * b / 27.0L - b * k / 3.0L + d;
  const long double m = 2.0L * std::sqrt(-p / 3.0L);
  long double arg = 3.0L * q / (p * m);
  arg = std::clamp(arg, -1.0L, 1.0L);
  const long double theta = std::acos(arg) / 3.0L;
  std::array<long double, 3> out;
  for (int k2 = 0; k2 < 3; ++k2) {
    long double x = m * std::cos(theta - 2.0L * std::numbers::pi_v<long double> * k2 / 3.0L) - b / 3.0L;
    for (int it = 0; it < 8; ++it) {
      const long double f = eval_cubic(c, x);
      const long double df = (3.0L * x + 2.0L * c[0]) * x + c[1];
      if (df == 0.0L) break;
      x -= f / df;
    }
    out[k2] = x;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Calls fn on every symmetric 3x3 matrix with entries in [lo, hi].
inline void for_each_symmetric3(int lo, int hi, const std::function<void(const Sym3&)>& fn) {
  Sym3 a{};
  for (int a00 = lo; a00 <= hi; ++a00)
    for (int a11 = lo; a11 <= hi; ++a11)
      for (int a22 = lo; a22 <= hi; ++a22)
        for (int a01 = lo; a01 <= hi; ++a01)
          for (int a02 = lo; a02 <= hi; ++a02)
            for (int a12 = lo; a12 <= hi; ++a12) {
              a[0][0] = a00;
              a[1][1] = a11;
              a[2][2] = a22;
              a[0][1] = a[1][0] = a01;
              a[0][2] = a[2][0] = a02;
              a[1][2] = a[2][1] = a12;
              fn(a);
            }
}

// Eigenvalues of [[a, b], [b, d]] by the quadratic formula.
inline std::array<long double, 2> sym2_roots(long double a, long double b, long double d) {
  const long double mid = (a + d) / 2.0L;
  const long double rad = std::sqrt((a - d) * (a - d) / 4.0L + b * b);
  return {mid - rad, mid + rad};
}

// Circulant Laplacian spectra, ascending.
inline std::vector<double> ring_metropolis_spectrum(int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k)
    out.push_back(2.0 / 3.0 * (1.0 - std::cos(2.0 * std::numbers::pi * k / n)));
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<double> ring_unweighted_spectrum(int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k)
    out.push_back(2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k / n));
  std::sort(out.begin(), out.end());
  return out;
}

// V through the pairwise identity V = (1/n) sum_{i<j} ||x_i - x_j||^2.
inline double pairwise_sync_index(const std::vector<std::vector<double>>& x) {
  const double n = static_cast<double>(x.size());
  long double s = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      for (std::size_t k = 0; k < x[i].size(); ++k) {
        const long double d = x[i][k] - x[j][k];
        s += d * d;
      }
  return static_cast<double>(s / n);
}

// Central differences with step h_k = 1e-6 (1 + |x_k|).
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x) {
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double h = 1e-6 * (1.0 + std::abs(x[k]));
    const double keep = x[k];
    x[k] = keep + h;
    const double up = f(x);
    x[k] = keep - h;
    const double down = f(x);
    x[k] = keep;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

// Every size-k subset of {0..m-1}, lexicographic.
inline std::vector<std::vector<int>> all_subsets(int m, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  if (k > m) return out;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == m - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

}  // namespace oracle
