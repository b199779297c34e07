// Copyright 2026 The scgossip Authors. All Rights Reserved.
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

#include "scg/mixing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "scg/errors.hpp"

namespace scg {

std::string MixingCheck::describe() const {
  std::ostringstream out;
  out << "square=" << square << " symmetric=" << symmetric
      << " unit_interval=" << entries_in_unit_interval
      << " doubly_stochastic=" << doubly_stochastic << " (max row-sum error "
      << max_row_sum_error << ") positive_diagonal=" << positive_diagonal
      << " respects_graph=" << respects_graph;
  return out.str();
}

MixingCheck check_mixing(const Matrix& w, const Graph* g) {
  MixingCheck check;
  if (w.rows() != w.cols() || w.rows() == 0) {
    check.square = false;
    return check;
  }
  const std::size_t n = w.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = w(i, j);
      if (!(v >= 0.0 && v <= 1.0)) check.entries_in_unit_interval = false;
      if (v != w(j, i)) check.symmetric = false;
      row_sum += v;
      if (g != nullptr && i != j && v != 0.0 && !(g->size() == n && g->has_edge(i, j)))
        check.respects_graph = false;
    }
    check.max_row_sum_error = std::max(check.max_row_sum_error, std::abs(row_sum - 1.0));
    if (!(w(i, i) > 0.0)) check.positive_diagonal = false;
  }
  if (g != nullptr && g->size() != n) check.respects_graph = false;
  // Symmetry makes column sums equal row sums.
  check.doubly_stochastic = check.max_row_sum_error <= kStochasticTolerance;
  return check;
}

MixingMatrix::MixingMatrix(Matrix entries) : entries_(std::move(entries)) {
  const auto check = check_mixing(entries_);
  if (!check.ok()) throw InvalidArgument("not a valid mixing matrix: " + check.describe());
}

bool MixingMatrix::respects(const Graph& g) const { return check_mixing(entries_, &g).ok(); }

MixingMatrix metropolis_hastings(const Graph& g) {
  require_connected(g);
  const std::size_t n = g.size();
  Matrix w(n, n);
  for (const auto& [i, j] : g.edges()) {
    const double closed_i = static_cast<double>(g.degree(i) + 1);
    const double closed_j = static_cast<double>(g.degree(j) + 1);
    const double weight = 1.0 / std::max(closed_i, closed_j);
    w(i, j) = weight;
    w(j, i) = weight;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (std::size_t j : g.neighbors(i)) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  return MixingMatrix(std::move(w));
}

MixingMatrix lazy_mix(const MixingMatrix& w, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("lazy_mix: gamma must be in (0, 1]");
  const std::size_t n = w.size();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(i, j) = gamma * w(i, j) + (i == j ? 1.0 - gamma : 0.0);
  return MixingMatrix(std::move(m));
}

std::vector<double> symmetric_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("eigensolve needs a square matrix");
  const auto n = static_cast<Eigen::Index>(m.rows());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = m(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");
  const auto& values = solver.eigenvalues();
  return {values.data(), values.data() + values.size()};
}

double Spectrum::second_magnitude() const {
  return eigenvalues.size() < 2 ? 0.0 : std::abs(eigenvalues[1]);
}

double Spectrum::second_largest() const {
  if (eigenvalues.size() < 2) return 0.0;
  std::vector<double> sorted = eigenvalues;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return sorted[1];
}

Spectrum spectrum(const MixingMatrix& w) {
  Spectrum s;
  s.eigenvalues = symmetric_eigenvalues(w.entries());
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](double a, double b) {
    const double ma = std::abs(a), mb = std::abs(b);
    return ma != mb ? ma > mb : a > b;
  });
  s.spectral_gap = 1.0 - s.second_magnitude();
  return s;
}

double deviation_norm(const MixingMatrix& w) {
  double worst = 0.0;
  for (double lambda : symmetric_eigenvalues(w.entries()))
    worst = std::max(worst, std::abs(lambda - 1.0));
  return worst;
}

AugmentedMatrix build_augmented(const MixingMatrix& a, double sigma) {
  if (!(sigma >= 0.0 && sigma < 1.0))
    throw InvalidArgument("build_augmented: sigma must be in [0, 1)");
  const std::size_t n = a.size();
  AugmentedMatrix b{Matrix(2 * n, 2 * n), sigma, n};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      b.entries(i, j) = (1.0 + sigma) * a(i, j);
      b.entries(i, n + j) = -sigma * a(i, j);
    }
    b.entries(n + i, i) = 1.0;
  }
  return b;
}

std::vector<double> power_contraction(const AugmentedMatrix& b, std::span<const double> v,
                                      std::size_t t_max, ContractionCase which) {
  const std::size_t n = b.n;
  if (v.size() != 2 * n) throw InvalidArgument("power_contraction: vector must have length 2n");
  if (t_max < 1) throw InvalidArgument("power_contraction: t_max must be >= 1");
  const double nn = static_cast<double>(n);
  if (which == ContractionCase::kEqualBlocks) {
    for (std::size_t i = 0; i < n; ++i)
      if (v[i] != v[n + i]) throw InvalidArgument("power_contraction: blocks of v differ");
  } else if (which == ContractionCase::kZeroMean) {
    double sum = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (v[n + i] != 0.0) throw InvalidArgument("power_contraction: second block of v must be 0");
      sum += v[i];
      mass += std::abs(v[i]);
    }
    if (std::abs(sum) > 1e-12 * mass) throw InvalidArgument("power_contraction: first block must sum to 0");
  }

  auto block_mean = [n, nn](std::span<const double> x, std::size_t offset) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += x[offset + i];
    return sum / nn;
  };

  // B maps block-constant vectors to block-constant vectors and zero-mean
  // blocks to zero-mean blocks, so the two parts evolve separately. The
  // block means follow the 2x2 recurrence exactly; the fluctuation is
  // iterated with B and re-centred, which keeps rounding from feeding the
  // eigenvalue-1 direction.
  // top/bottom hold the block means minus the target mean.
  // For zero-sum q the means vanish by hypothesis; rounding in q is dropped.
  const bool zero_mean = which == ContractionCase::kZeroMean;
  const double target = zero_mean ? 0.0 : block_mean(v, 0);
  const double bottom_mean = zero_mean ? 0.0 : block_mean(v, n);
  double top = 0.0;
  double bottom = bottom_mean - target;
  std::vector<double> fluct(v.begin(), v.end());
  const double top_shift = zero_mean ? block_mean(v, 0) : target;
  for (std::size_t i = 0; i < n; ++i) {
    fluct[i] -= top_shift;
    fluct[n + i] -= bottom_mean;
  }

  auto distance = [&] {
    const double f = euclidean_norm(fluct);
    return std::sqrt(nn * (top * top + bottom * bottom) + f * f);
  };

  std::vector<double> norms;
  norms.reserve(t_max + 1);
  norms.push_back(distance());
  for (std::size_t t = 1; t <= t_max; ++t) {
    fluct = multiply(b.entries, fluct);
    const double drift_top = block_mean(fluct, 0), drift_bottom = block_mean(fluct, n);
    for (std::size_t i = 0; i < n; ++i) {
      fluct[i] -= drift_top;
      fluct[n + i] -= drift_bottom;
    }
    const double next_top = (1.0 + b.sigma) * top - b.sigma * bottom;
    bottom = top;
    top = next_top;
    norms.push_back(distance());
  }
  return norms;
}

}  // namespace scg
