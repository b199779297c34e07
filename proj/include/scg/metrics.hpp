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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scg/dense.hpp"

namespace scg {

/// Consensus error ||X - X_bar||_F, where X_bar repeats the column means.
double psi(const Matrix& x);

struct TraceMetadata {
  std::string variant;
  std::string topology;
  std::size_t n = 0;
  std::size_t d = 0;
  double gamma = 0.0;
  double sigma = 0.0;
  bool sigma_overridden = false;
  std::string compressor = "identity";
  int k = 0;
  double omega = 0.0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
};

struct TraceRow {
  long t = 0;
  double psi = 0.0;
  std::uint64_t bits_cumulative = 0;
};

/// Per-round record of one consensus run.
struct RunTrace {
  TraceMetadata metadata;
  std::vector<TraceRow> rows;
  bool converged = false;
  std::optional<long> rounds_to_eps;

  /// Cumulative bits at the final row (0 for an empty trace).
  std::uint64_t total_bits() const { return rows.empty() ? 0 : rows.back().bits_cumulative; }

  /// Checks t strictly increasing from 0, nondecreasing bits, psi >= 0 and
  /// converged => last psi <= epsilon. Returns an empty string when valid.
  std::string invariant_violation() const;
};

/// Trace rendered as CSV with header `t,psi,bits_cumulative`.
std::string trace_csv(const RunTrace& trace);

struct RateFit {
  double rho = 0.0;        // exp(slope of log psi vs t)
  double r_squared = 0.0;
  std::size_t burn_in = 0; // leading rounds excluded
};

inline constexpr double kDefaultBurnIn = 0.1;

/// Least-squares fit of log psi against t after dropping the first
/// `burn_in_fraction` of rounds. Rows with psi == 0 are skipped. Needs at
/// least 20 rows with psi > 0.
RateFit fit_linear_rate(const RunTrace& trace, double burn_in_fraction = kDefaultBurnIn);
RateFit fit_linear_rate(std::span<const double> t, std::span<const double> psi,
                        double burn_in_fraction = kDefaultBurnIn);

struct ScalingPoint {
  double n = 0.0;
  double rounds = 0.0;
  bool converged = true;
};

/// Slope of log(rounds) against log(n). Needs >= 4 points, all converged.
double scaling_exponent(std::span<const ScalingPoint> points);

/// Ordinary least squares y = a + b x; returns {b, a, r_squared}.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LineFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace scg
