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

#include <array>
#include <cstddef>
#include <span>
#include <string>

#include "scg/mixing.hpp"

namespace scg::theory {

/// Momentum weight sigma = (5n - sqrt(gamma)) / (5n + sqrt(gamma)).
/// n >= 2, gamma in (0, 1/2].
double momentum_sigma(std::size_t n, double gamma);

/// Exact-gossip momentum rate lambda = 1 - sqrt(gamma) / (5n).
double rate_lambda(std::size_t n, double gamma);

/// Compressed momentum rate lambda~ = 1 - sqrt(gamma) / (10n); always
/// >= sqrt(lambda).
double rate_lambda_tilde(std::size_t n, double gamma);

/// Row-major 2x2 matrix.
using Mat2 = std::array<double, 4>;

/// T2 = [[1+sigma, -sigma], [0, 0]].
Mat2 momentum_block_t2(double sigma);
/// T3 = [[sigma, -sigma], [1, -1]].
Mat2 momentum_block_t3(double sigma);

struct Kappas {
  double kappa2 = 1.0;  // ||T2|| = sqrt(2 sigma^2 + 2 sigma + 1)
  double kappa3 = 1.0;  // ||T3|| = sqrt(2 sigma^2 + 2)
};
Kappas kappa_constants(double sigma);

/// Largest omega for which the compressed method provably converges:
///   1 / (2 (k3 + g b k2) (lambda^-1/2 + g b k2 C lambda^-1 (1 - lambda^1/2)^-2)).
/// `C` is the unspecified constant of the zero-mean contraction bound.
double omega_feasibility_bound(double gamma, double beta, double sigma, double lambda,
                               double c = 1.0);

/// Lower bound gamma / (25 n^2) on the spectral gap of the lazy matrix.
double gap_lower_bound(std::size_t n, double gamma);

/// Parameterization of the augmented-matrix contraction by p > 1:
/// lambda = 1 - 1/p, sigma = (p - 1) / (p + 1).
struct LemmaParameters {
  double p = 0.0;
  double lambda = 0.0;
  double sigma = 0.0;
};
LemmaParameters lemma_parameters(double p);

/// Tightest p for A: p = 1 / sqrt(1 - lambda_2(A)), with lambda_2 the
/// second-largest (signed) eigenvalue.
LemmaParameters lemma_parameters_for(const MixingMatrix& a);

/// Running supremum of ||B^t v|| / (t lambda^t) from the zero-mean
/// contraction bound, sampled at t_lo and t_hi. `norms[t]` is ||B^t v||.
struct ConstantFit {
  double sup_lo = 0.0;  // sup over 1 <= t <= t_lo
  double sup_hi = 0.0;  // sup over 1 <= t <= t_hi, the fitted C
  double ratio() const { return sup_hi / sup_lo; }
  bool finite() const;
};
ConstantFit fit_contraction_constant(std::span<const double> norms, double lambda,
                                     std::size_t t_lo, std::size_t t_hi);

/// Every closed-form constant for one (n, gamma, W, C) instance.
struct TheoryBundle {
  std::size_t n = 0;
  double gamma = 0.0;
  double sigma = 0.0;
  double lambda = 0.0;
  double lambda_tilde = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;
  double beta = 0.0;
  double gap_lower_bound = 0.0;
  double measured_gap_lazy = 0.0;  // delta((1-gamma) I + gamma W)
  double c = 1.0;
  double omega_bound = 0.0;
};

TheoryBundle compute_bundle(std::size_t n, double gamma, const MixingMatrix& w, double c = 1.0);

/// JSON object text, 17 significant digits.
std::string to_json(const TheoryBundle& bundle, const std::string& topology);

}  // namespace scg::theory
