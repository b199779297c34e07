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
#include <string>
#include <vector>

#include "scg/compression.hpp"
#include "scg/dense.hpp"
#include "scg/graph.hpp"
#include "scg/metrics.hpp"
#include "scg/mixing.hpp"

namespace scg {

/// The four specializations of the compressed momentum gossip recursion:
///   EG   sigma = 0,       exact messages
///   CG   sigma = 0,       compressed messages
///   SEG  sigma = sigma*,  exact messages
///   SCG  sigma = sigma*,  compressed messages
/// with sigma* = (5n - sqrt(gamma)) / (5n + sqrt(gamma)).
enum class Variant { kEG, kCG, kSEG, kSCG };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);
bool uses_momentum(Variant v);
bool uses_compression(Variant v);

/// Largest admissible step-size for the variant (1 without momentum, 1/2 with).
double max_gamma(Variant v);

struct AlgorithmConfig {
  Variant variant = Variant::kSCG;
  double gamma = 0.5;
  double sigma = 0.0;
  bool sigma_overridden = false;
  CompressorSpec compressor;

  /// Fills sigma from the variant (0 or the momentum formula for n) unless
  /// `sigma_override` is given.
  static AlgorithmConfig make(Variant variant, double gamma, std::size_t n,
                              CompressorSpec compressor = CompressorSpec::identity(),
                              std::optional<double> sigma_override = std::nullopt);

  void validate(std::size_t n, std::size_t d) const;
};

struct RoundReport {
  double psi = 0.0;
  /// Bits over every directed edge this round: 2 |E| message_bits.
  std::uint64_t bits_sent_total = 0;
};

/// Divergence is declared when psi is non-finite or exceeds this multiple
/// of psi(0).
inline constexpr double kDivergenceFactor = 1e12;

/// Stacked iterates of a synchronous run:
///   X^(t+1) = X^(t) + Q(X(t) - X^(t))      (row-wise, one stream per agent)
///   Y(t+1)  = X(t) + gamma (W - I) X^(t+1)
///   X(t+1)  = (1 + sigma) Y(t+1) - sigma Y(t)
/// starting from Y(0) = X(0), X^(0) = 0.
class ConsensusState {
 public:
  static ConsensusState init(const Matrix& x0, const Graph& g, const MixingMatrix& w,
                             const AlgorithmConfig& cfg, std::uint64_t seed);

  RoundReport step();

  long t() const noexcept { return t_; }
  std::size_t n() const noexcept { return x_.rows(); }
  std::size_t d() const noexcept { return x_.cols(); }
  const Matrix& x() const noexcept { return x_; }
  const Matrix& y() const noexcept { return y_; }
  const Matrix& x_hat() const noexcept { return x_hat_; }
  const std::vector<double>& target_mean() const noexcept { return target_mean_; }
  const AlgorithmConfig& config() const noexcept { return cfg_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double omega() const;
  std::uint64_t round_bits() const noexcept { return round_bits_; }
  double psi() const { return scg::psi(x_); }

 private:
  struct WeightedNeighbor {
    std::size_t j;
    double weight;
  };

  ConsensusState() = default;

  AlgorithmConfig cfg_;
  std::uint64_t seed_ = 0;
  long t_ = 0;
  Matrix x_, y_, x_hat_, y_next_;
  std::vector<double> target_mean_;
  std::vector<std::vector<WeightedNeighbor>> mixing_rows_;
  std::vector<Compressor> compressors_;
  std::vector<double> diff_, q_;
  std::uint64_t round_bits_ = 0;
};

/// Steps until psi <= epsilon or t reaches max_rounds, recording one trace
/// row per round (including round 0). Throws DivergenceError on blow-up.
RunTrace run(ConsensusState& state, double epsilon, long max_rounds,
             const std::string& topology = "");

}  // namespace scg
