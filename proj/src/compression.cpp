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

#include "scg/compression.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "scg/dense.hpp"
#include "scg/errors.hpp"

namespace scg {

namespace {

constexpr int kMaxQsgdBits = 32;

struct QsgdShape {
  double levels;
  double tau;
};

QsgdShape qsgd_shape(int k, std::size_t dim) {
  const double u = std::ldexp(1.0, k - 1) - 1.0;
  const double d = static_cast<double>(dim);
  return {u, 1.0 + std::min(d / (u * u), std::sqrt(d) / u)};
}

std::uint64_t ceil_log2(std::uint64_t x) { return x <= 1 ? 0 : std::bit_width(x - 1); }

}  // namespace

CompressorSpec CompressorSpec::parse(const std::string& name, int k) {
  if (name == "identity") return identity();
  const auto underscore = name.rfind('_');
  if (underscore == std::string::npos) throw InvalidArgument("unknown compressor '" + name + "'");
  const std::string base = name.substr(0, underscore);
  const std::string suffix = name.substr(underscore + 1);
  int param = k;
  if (suffix != "k") {
    try {
      std::size_t used = 0;
      param = std::stoi(suffix, &used);
      if (used != suffix.size()) throw InvalidArgument("");
    } catch (const std::exception&) {
      throw InvalidArgument("unknown compressor '" + name + "'");
    }
  }
  if (base == "rand") return rand_k(param);
  if (base == "top") return top_k(param);
  if (base == "qsgd") return qsgd_k(param);
  throw InvalidArgument("unknown compressor '" + name + "'");
}

std::string CompressorSpec::family() const {
  switch (kind) {
    case CompressorKind::kIdentity: return "identity";
    case CompressorKind::kRandK: return "rand_k";
    case CompressorKind::kTopK: return "top_k";
    case CompressorKind::kQsgdK: return "qsgd_k";
  }
  return "identity";
}

std::string CompressorSpec::label() const {
  if (kind == CompressorKind::kIdentity) return "identity";
  auto f = family();
  return f.substr(0, f.size() - 1) + std::to_string(k);
}

void validate(const CompressorSpec& spec, std::size_t dim) {
  if (dim == 0) throw InvalidArgument("compressor dimension must be positive");
  switch (spec.kind) {
    case CompressorKind::kIdentity: return;
    case CompressorKind::kRandK:
    case CompressorKind::kTopK:
      if (spec.k < 1 || static_cast<std::size_t>(spec.k) > dim)
        throw InvalidArgument(spec.family() + ": k must be in [1, d]");
      return;
    case CompressorKind::kQsgdK:
      if (spec.k < 2 || spec.k > kMaxQsgdBits)
        throw InvalidArgument("qsgd_k: k must be in [2, 32]");
      return;
  }
}

double omega_squared(const CompressorSpec& spec, std::size_t dim) {
  validate(spec, dim);
  switch (spec.kind) {
    case CompressorKind::kIdentity: return 0.0;
    case CompressorKind::kRandK:
    case CompressorKind::kTopK:
      return 1.0 - static_cast<double>(spec.k) / static_cast<double>(dim);
    case CompressorKind::kQsgdK: return 1.0 - 1.0 / qsgd_shape(spec.k, dim).tau;
  }
  return 0.0;
}

Compressor::Compressor(CompressorSpec spec, std::size_t dim, std::uint64_t seed)
    : spec_(spec), dim_(dim), rng_(seed), omega_squared_(scg::omega_squared(spec, dim)) {
  if (!(omega_squared_ < 1.0)) throw InvalidArgument("compressor contract requires omega < 1");
  if (spec_.kind == CompressorKind::kQsgdK) {
    const auto shape = qsgd_shape(spec_.k, dim_);
    levels_ = shape.levels;
    tau_ = shape.tau;
  }
  if (spec_.kind == CompressorKind::kRandK || spec_.kind == CompressorKind::kTopK) {
    scratch_.resize(dim_);
    std::iota(scratch_.begin(), scratch_.end(), 0);
  }
}

double Compressor::omega() const { return std::sqrt(omega_squared_); }

std::uint64_t Compressor::message_bits() const {
  const auto d = static_cast<std::uint64_t>(dim_);
  const auto k = static_cast<std::uint64_t>(spec_.k);
  switch (spec_.kind) {
    case CompressorKind::kIdentity: return d * kValueBits;
    case CompressorKind::kRandK:
    case CompressorKind::kTopK: return k * (kValueBits + ceil_log2(d));
    case CompressorKind::kQsgdK: return d * k + kValueBits;
  }
  return 0;
}

std::vector<double> Compressor::compress(std::span<const double> x) {
  std::vector<double> out(x.size());
  compress(x, out);
  return out;
}

void Compressor::compress(std::span<const double> x, std::span<double> out) {
  if (x.size() != dim_ || out.size() != dim_)
    throw InvalidArgument("compress: expected vectors of length " + std::to_string(dim_));
  switch (spec_.kind) {
    case CompressorKind::kIdentity: std::copy(x.begin(), x.end(), out.begin()); return;
    case CompressorKind::kRandK: keep_random(x, out); return;
    case CompressorKind::kTopK: keep_top(x, out); return;
    case CompressorKind::kQsgdK: quantize(x, out); return;
  }
}

void Compressor::keep_random(std::span<const double> x, std::span<double> out) {
  // Partial Fisher-Yates over a persistent permutation; the first k slots
  // are a uniform k-subset whatever order the permutation was left in.
  const auto k = static_cast<std::size_t>(spec_.k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng_.below(dim_ - i);
    std::swap(scratch_[i], scratch_[j]);
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < k; ++i) out[scratch_[i]] = x[scratch_[i]];
}

void Compressor::keep_top(std::span<const double> x, std::span<double> out) {
  const auto k = static_cast<std::size_t>(spec_.k);
  std::iota(scratch_.begin(), scratch_.end(), 0);
  auto by_magnitude = [&x](std::size_t a, std::size_t b) {
    const double ma = std::abs(x[a]), mb = std::abs(x[b]);
    return ma != mb ? ma > mb : a < b;
  };
  if (k < dim_) std::nth_element(scratch_.begin(), scratch_.begin() + k, scratch_.end(), by_magnitude);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < k; ++i) out[scratch_[i]] = x[scratch_[i]];
}

void Compressor::quantize(std::span<const double> x, std::span<double> out) {
  const double norm = euclidean_norm(x);
  if (norm == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double scale = norm / (levels_ * tau_);
  const double to_levels = levels_ / norm;
  for (std::size_t i = 0; i < dim_; ++i) {
    // Level u is reachable only when |x_i| = ||x||; it still fits in k-1 bits.
    // Truncation is floor here since the argument is non-negative.
    const auto level = static_cast<double>(
        static_cast<std::int64_t>(to_levels * std::abs(x[i]) + rng_.uniform()));
    const double sign = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
    out[i] = sign * scale * level;
  }
}

}  // namespace scg
