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

#include "scg/theory.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "scg/errors.hpp"

namespace scg::theory {

namespace {

void require_momentum_range(std::size_t n, double gamma) {
  if (n < 2) throw InvalidArgument("n must be >= 2");
  if (!(gamma > 0.0 && gamma <= 0.5)) throw InvalidArgument("gamma must be in (0, 1/2]");
}

}  // namespace

double momentum_sigma(std::size_t n, double gamma) {
  require_momentum_range(n, gamma);
  const double five_n = 5.0 * static_cast<double>(n);
  const double root = std::sqrt(gamma);
  return (five_n - root) / (five_n + root);
}

double rate_lambda(std::size_t n, double gamma) {
  require_momentum_range(n, gamma);
  return 1.0 - std::sqrt(gamma) / (5.0 * static_cast<double>(n));
}

double rate_lambda_tilde(std::size_t n, double gamma) {
  require_momentum_range(n, gamma);
  return 1.0 - std::sqrt(gamma) / (10.0 * static_cast<double>(n));
}

Mat2 momentum_block_t2(double sigma) { return {1.0 + sigma, -sigma, 0.0, 0.0}; }
Mat2 momentum_block_t3(double sigma) { return {sigma, -sigma, 1.0, -1.0}; }

Kappas kappa_constants(double sigma) {
  if (!(sigma >= 0.0 && sigma < 1.0)) throw InvalidArgument("sigma must be in [0, 1)");
  return {std::sqrt(2.0 * sigma * sigma + 2.0 * sigma + 1.0), std::sqrt(2.0 * sigma * sigma + 2.0)};
}

double omega_feasibility_bound(double gamma, double beta, double sigma, double lambda, double c) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must be in (0, 1)");
  if (!(c > 0.0)) throw InvalidArgument("C must be positive");
  if (!(gamma > 0.0) || !(beta >= 0.0)) throw InvalidArgument("gamma > 0 and beta >= 0 required");
  const auto [k2, k3] = kappa_constants(sigma);
  const double coupling = gamma * beta * k2;
  const double tail = 1.0 - std::sqrt(lambda);
  const double denom =
      2.0 * (k3 + coupling) * (1.0 / std::sqrt(lambda) + coupling * c / (lambda * tail * tail));
  return 1.0 / denom;
}

double gap_lower_bound(std::size_t n, double gamma) {
  if (n < 2) throw InvalidArgument("n must be >= 2");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must be in (0, 1]");
  const double nn = static_cast<double>(n);
  return gamma / (25.0 * nn * nn);
}

LemmaParameters lemma_parameters(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("p must be finite and > 1");
  return {p, 1.0 - 1.0 / p, (p - 1.0) / (p + 1.0)};
}

LemmaParameters lemma_parameters_for(const MixingMatrix& a) {
  const double lambda2 = spectrum(a).second_largest();
  if (!(lambda2 < 1.0)) throw NumericError("lambda_2 = 1: matrix has no spectral gap");
  if (!(lambda2 > 0.0)) throw InvalidArgument("lambda_2 <= 0: p = 1/sqrt(1 - lambda_2) is not > 1");
  return lemma_parameters(1.0 / std::sqrt(1.0 - lambda2));
}

bool ConstantFit::finite() const {
  return std::isfinite(sup_lo) && std::isfinite(sup_hi) && sup_lo > 0.0;
}

ConstantFit fit_contraction_constant(std::span<const double> norms, double lambda,
                                     std::size_t t_lo, std::size_t t_hi) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must be in (0, 1)");
  if (t_lo < 1 || t_lo > t_hi) throw InvalidArgument("need 1 <= t_lo <= t_hi");
  if (norms.size() <= t_hi) throw InvalidArgument("norms must cover t = 0..t_hi");
  ConstantFit fit;
  double sup = 0.0;
  const double log_lambda = std::log(lambda);
  for (std::size_t t = 1; t <= t_hi; ++t) {
    const double td = static_cast<double>(t);
    // Work in logs; lambda^t underflows well before t = 500 for small p.
    const double r = norms[t] == 0.0
                         ? 0.0
                         : std::exp(std::log(norms[t]) - std::log(td) - td * log_lambda);
    sup = std::max(sup, r);
    if (t == t_lo) fit.sup_lo = sup;
  }
  fit.sup_hi = sup;
  return fit;
}

TheoryBundle compute_bundle(std::size_t n, double gamma, const MixingMatrix& w, double c) {
  if (w.size() != n) throw InvalidArgument("mixing matrix size does not match n");
  TheoryBundle b;
  b.n = n;
  b.gamma = gamma;
  b.c = c;
  b.sigma = momentum_sigma(n, gamma);
  b.lambda = rate_lambda(n, gamma);
  b.lambda_tilde = rate_lambda_tilde(n, gamma);
  const auto kappas = kappa_constants(b.sigma);
  b.kappa2 = kappas.kappa2;
  b.kappa3 = kappas.kappa3;
  b.beta = deviation_norm(w);
  b.gap_lower_bound = gap_lower_bound(n, gamma);
  b.measured_gap_lazy = spectrum(lazy_mix(w, gamma)).spectral_gap;
  b.omega_bound = omega_feasibility_bound(gamma, b.beta, b.sigma, b.lambda, c);
  return b;
}

std::string to_json(const TheoryBundle& b, const std::string& topology) {
  nlohmann::ordered_json j;
  j["topology"] = topology;
  j["n"] = b.n;
  j["gamma"] = b.gamma;
  j["sigma"] = b.sigma;
  j["lambda"] = b.lambda;
  j["lambda_tilde"] = b.lambda_tilde;
  j["kappa2"] = b.kappa2;
  j["kappa3"] = b.kappa3;
  j["beta"] = b.beta;
  j["gap_lower_bound"] = b.gap_lower_bound;
  j["measured_gap_lazy"] = b.measured_gap_lazy;
  j["C"] = b.c;
  j["omega_bound"] = b.omega_bound;
  return j.dump(2);
}

}  // namespace scg::theory
