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

#include "scg/consensus.hpp"

#include <algorithm>
#include <cmath>

#include "scg/errors.hpp"
#include "scg/theory.hpp"

namespace scg {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kEG: return "EG";
    case Variant::kCG: return "CG";
    case Variant::kSEG: return "SEG";
    case Variant::kSCG: return "SCG";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  std::string upper = name;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "EG") return Variant::kEG;
  if (upper == "CG") return Variant::kCG;
  if (upper == "SEG") return Variant::kSEG;
  if (upper == "SCG") return Variant::kSCG;
  throw InvalidArgument("unknown variant '" + name + "' (expected EG, CG, SEG or SCG)");
}

bool uses_momentum(Variant v) { return v == Variant::kSEG || v == Variant::kSCG; }
bool uses_compression(Variant v) { return v == Variant::kCG || v == Variant::kSCG; }
double max_gamma(Variant v) { return uses_momentum(v) ? 0.5 : 1.0; }

AlgorithmConfig AlgorithmConfig::make(Variant variant, double gamma, std::size_t n,
                                      CompressorSpec compressor,
                                      std::optional<double> sigma_override) {
  AlgorithmConfig cfg;
  cfg.variant = variant;
  cfg.gamma = gamma;
  cfg.compressor = compressor;
  if (sigma_override) {
    cfg.sigma = *sigma_override;
    cfg.sigma_overridden = true;
  } else if (uses_momentum(variant)) {
    cfg.sigma = theory::momentum_sigma(n, gamma);
  }
  return cfg;
}

void AlgorithmConfig::validate(std::size_t n, std::size_t d) const {
  if (!(gamma > 0.0 && gamma <= max_gamma(variant))) {
    throw InvalidArgument(to_string(variant) + ": gamma must be in (0, " +
                          format_double(max_gamma(variant)) + "]");
  }
  if (!(sigma >= 0.0 && sigma < 1.0)) throw InvalidArgument("sigma must be in [0, 1)");
  if (!sigma_overridden) {
    const double expected = uses_momentum(variant) ? theory::momentum_sigma(n, gamma) : 0.0;
    if (sigma != expected) {
      throw InvalidArgument(to_string(variant) + ": sigma does not match the variant; "
                            "set sigma_overridden to use a custom value");
    }
  }
  if (!uses_compression(variant) && !compressor.is_identity())
    throw InvalidArgument(to_string(variant) + " uses exact messages; compressor must be identity");
  scg::validate(compressor, d);
}

ConsensusState ConsensusState::init(const Matrix& x0, const Graph& g, const MixingMatrix& w,
                                    const AlgorithmConfig& cfg, std::uint64_t seed) {
  const std::size_t n = g.size();
  if (x0.rows() != n) throw InvalidArgument("x0 must have one row per node");
  if (x0.cols() == 0) throw InvalidArgument("x0 must have d >= 1 columns");
  if (w.size() != n) throw InvalidArgument("mixing matrix size does not match the graph");
  if (!w.respects(g)) throw InvalidArgument("mixing matrix has weight on a non-edge");
  cfg.validate(n, x0.cols());

  ConsensusState s;
  s.cfg_ = cfg;
  s.seed_ = seed;
  s.x_ = x0;
  s.y_ = x0;
  s.x_hat_ = Matrix(n, x0.cols());
  s.y_next_ = Matrix(n, x0.cols());
  s.target_mean_ = column_mean(x0);
  s.mixing_rows_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : g.neighbors(i))
      if (w(i, j) != 0.0) s.mixing_rows_[i].push_back({j, w(i, j)});
  s.compressors_.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    s.compressors_.emplace_back(cfg.compressor, x0.cols(), seed ^ static_cast<std::uint64_t>(i));
  s.diff_.resize(x0.cols());
  s.q_.resize(x0.cols());
  s.round_bits_ = 2 * static_cast<std::uint64_t>(g.num_edges()) * s.compressors_.front().message_bits();
  return s;
}

double ConsensusState::omega() const { return compressors_.front().omega(); }

RoundReport ConsensusState::step() {
  const std::size_t n = x_.rows();
  const std::size_t d = x_.cols();
  const double gamma = cfg_.gamma;
  const double sigma = cfg_.sigma;

  // Public estimates. Q = identity reproduces x exactly.
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = x_.row(i);
    auto hat = x_hat_.row(i);
    if (cfg_.compressor.is_identity()) {
      std::copy(xi.begin(), xi.end(), hat.begin());
      continue;
    }
    for (std::size_t c = 0; c < d; ++c) diff_[c] = xi[c] - hat[c];
    compressors_[i].compress(diff_, q_);
    for (std::size_t c = 0; c < d; ++c) hat[c] += q_[c];
  }

  // Gossip on the estimates: y_i = x_i + gamma sum_j W_ij (x^_j - x^_i).
  for (std::size_t i = 0; i < n; ++i) {
    auto out = y_next_.row(i);
    auto xi = x_.row(i);
    auto hat_i = x_hat_.row(i);
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& [j, weight] : mixing_rows_[i]) {
      auto hat_j = x_hat_.row(j);
      for (std::size_t c = 0; c < d; ++c) out[c] += weight * (hat_j[c] - hat_i[c]);
    }
    for (std::size_t c = 0; c < d; ++c) out[c] = xi[c] + gamma * out[c];
  }

  // Heavy-ball extrapolation.
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = x_.row(i);
    auto yi = y_.row(i);
    auto next = y_next_.row(i);
    for (std::size_t c = 0; c < d; ++c) {
      xi[c] = (1.0 + sigma) * next[c] - sigma * yi[c];
      yi[c] = next[c];
    }
  }
  ++t_;
  return {psi(), round_bits_};
}

RunTrace run(ConsensusState& state, double epsilon, long max_rounds, const std::string& topology) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (max_rounds < 0) throw InvalidArgument("max_rounds must be non-negative");

  RunTrace trace;
  auto& meta = trace.metadata;
  const auto& cfg = state.config();
  meta.variant = to_string(cfg.variant);
  meta.topology = topology;
  meta.n = state.n();
  meta.d = state.d();
  meta.gamma = cfg.gamma;
  meta.sigma = cfg.sigma;
  meta.sigma_overridden = cfg.sigma_overridden;
  meta.compressor = cfg.compressor.family();
  meta.k = cfg.compressor.k;
  meta.omega = state.omega();
  meta.seed = state.seed();
  meta.epsilon = epsilon;

  const double psi0 = state.psi();
  std::uint64_t bits = 0;
  double current = psi0;
  trace.rows.push_back({state.t(), current, bits});
  while (current > epsilon && state.t() < max_rounds) {
    const auto report = state.step();
    current = report.psi;
    bits += report.bits_sent_total;
    if (!std::isfinite(current) || current > kDivergenceFactor * psi0)
      throw DivergenceError(state.t(), "psi = " + format_double(current));
    trace.rows.push_back({state.t(), current, bits});
  }
  trace.converged = current <= epsilon;
  if (trace.converged) trace.rounds_to_eps = state.t();
  return trace;
}

}  // namespace scg
