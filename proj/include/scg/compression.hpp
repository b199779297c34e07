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
#include <span>
#include <string>
#include <vector>

#include "scg/random.hpp"

namespace scg {

enum class CompressorKind { kIdentity, kRandK, kTopK, kQsgdK };

/// Bits used for one dense real value on the wire.
inline constexpr std::uint64_t kValueBits = 32;

/// Operator family plus its integer parameter (ignored for identity).
struct CompressorSpec {
  CompressorKind kind = CompressorKind::kIdentity;
  int k = 0;

  static CompressorSpec identity() { return {}; }
  static CompressorSpec rand_k(int k) { return {CompressorKind::kRandK, k}; }
  static CompressorSpec top_k(int k) { return {CompressorKind::kTopK, k}; }
  static CompressorSpec qsgd_k(int k) { return {CompressorKind::kQsgdK, k}; }

  /// Accepts "identity", "rand_k"/"top_k"/"qsgd_k" together with `k`, or the
  /// shorthand "qsgd_5", "top_10", "rand_3".
  static CompressorSpec parse(const std::string& name, int k = 0);

  /// Config name: "identity", "rand_k", "top_k" or "qsgd_k".
  std::string family() const;
  /// Human readable label, e.g. "qsgd_5" or "identity".
  std::string label() const;
  bool is_identity() const { return kind == CompressorKind::kIdentity; }

  bool operator==(const CompressorSpec&) const = default;
};

/// Randomized compression operator Q with contract
/// E||Q(x) - x||^2 <= omega^2 ||x||^2.
///
/// rand_k and top_k keep k coordinates. qsgd_k stochastically rounds
/// |x|/||x|| onto u = 2^(k-1) - 1 levels and rescales by 1/(u tau) with
/// tau = 1 + min(d/u^2, sqrt(d)/u). Instances own their random stream and
/// are not shared between agents.
class Compressor {
 public:
  Compressor(CompressorSpec spec, std::size_t dim, std::uint64_t seed);

  /// Writes Q(x) into out. x and out must both have length dim() and may
  /// not alias.
  void compress(std::span<const double> x, std::span<double> out);
  std::vector<double> compress(std::span<const double> x);

  double omega() const;
  double omega_squared() const { return omega_squared_; }

  /// Wire size of one compressed vector:
  ///   identity        d * 32
  ///   rand_k / top_k  k * (32 + ceil(log2 d))
  ///   qsgd_k          d * k + 32 (k-1 level bits and a sign per
  ///                   coordinate, plus the norm)
  std::uint64_t message_bits() const;

  const CompressorSpec& spec() const noexcept { return spec_; }
  std::size_t dim() const noexcept { return dim_; }

 private:
  void keep_random(std::span<const double> x, std::span<double> out);
  void keep_top(std::span<const double> x, std::span<double> out);
  void quantize(std::span<const double> x, std::span<double> out);

  CompressorSpec spec_;
  std::size_t dim_;
  Rng rng_;
  double omega_squared_ = 0.0;
  double levels_ = 0.0;  // u, for qsgd
  double tau_ = 1.0;     // for qsgd
  std::vector<std::size_t> scratch_;
};

/// omega^2 of a configuration without instantiating an operator.
double omega_squared(const CompressorSpec& spec, std::size_t dim);
/// Throws InvalidArgument when (spec, dim) is not a valid operator.
void validate(const CompressorSpec& spec, std::size_t dim);

}  // namespace scg
