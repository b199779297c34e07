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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scg/dense.hpp"
#include "scg/graph.hpp"

namespace scg {

/// Tolerance on |row sum - 1| for a valid mixing matrix.
inline constexpr double kStochasticTolerance = 1e-12;

/// Outcome of checking the mixing-matrix invariants on a raw dense matrix.
struct MixingCheck {
  bool square = true;
  bool symmetric = true;
  bool entries_in_unit_interval = true;
  bool doubly_stochastic = true;
  bool positive_diagonal = true;
  bool respects_graph = true;  // only meaningful when a graph was supplied
  double max_row_sum_error = 0.0;

  bool ok() const {
    return square && symmetric && entries_in_unit_interval && doubly_stochastic &&
           positive_diagonal && respects_graph;
  }
  std::string describe() const;
};

MixingCheck check_mixing(const Matrix& w, const Graph* g = nullptr);

/// Symmetric doubly stochastic matrix with positive diagonal. The invariants
/// are checked on construction; instances are immutable.
class MixingMatrix {
 public:
  explicit MixingMatrix(Matrix entries);

  std::size_t size() const noexcept { return entries_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
  const Matrix& entries() const noexcept { return entries_; }

  /// True when W_ij = 0 for every non-edge i != j of g.
  bool respects(const Graph& g) const;

 private:
  Matrix entries_;
};

/// W_ij = 1 / max(|N_i'|, |N_j'|) on edges, W_ii = 1 - sum of the row.
/// Rejects disconnected graphs.
MixingMatrix metropolis_hastings(const Graph& g);

/// M = (1 - gamma) I + gamma W, gamma in (0, 1].
MixingMatrix lazy_mix(const MixingMatrix& w, double gamma);

struct Spectrum {
  /// Sorted by descending magnitude (ties: larger signed value first).
  std::vector<double> eigenvalues;
  /// 1 - |lambda_2|.
  double spectral_gap = 0.0;

  double second_magnitude() const;
  /// Second-largest eigenvalue in signed order.
  double second_largest() const;
};

/// Full symmetric eigendecomposition (Householder tridiagonalization + QR).
Spectrum spectrum(const MixingMatrix& w);

/// Eigenvalues of any symmetric matrix, in ascending order.
std::vector<double> symmetric_eigenvalues(const Matrix& m);

/// ||W - I||_2 = max_i |lambda_i(W) - 1| for symmetric W.
double deviation_norm(const MixingMatrix& w);

/// B = [[(1+sigma) A, -sigma A], [I, 0]], the 2n x 2n momentum operator.
struct AugmentedMatrix {
  Matrix entries;
  double sigma = 0.0;
  std::size_t n = 0;
};

AugmentedMatrix build_augmented(const MixingMatrix& a, double sigma);

/// Shape of the starting vector: [q; q], [q; 0] with 1'q = 0, or anything.
enum class ContractionCase { kEqualBlocks, kZeroMean, kGeneral };

/// Norms of B^t v - v_bar for t = 0..t_max by repeated matrix-vector
/// products. v_bar stacks the mean of v's first block twice; for
/// kZeroMean it is zero and the norms are ||B^t v||. Block means are
/// carried separately from the zero-mean part so rounding cannot leak into
/// the eigenvalue-1 direction.
std::vector<double> power_contraction(const AugmentedMatrix& b, std::span<const double> v,
                                      std::size_t t_max,
                                      ContractionCase which = ContractionCase::kGeneral);

}  // namespace scg
