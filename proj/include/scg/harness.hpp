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
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scg/compression.hpp"
#include "scg/consensus.hpp"
#include "scg/dense.hpp"
#include "scg/graph.hpp"
#include "scg/metrics.hpp"
#include "scg/mixing.hpp"

namespace scg::harness {

enum class ExperimentKind {
  kSingleRun,
  kSweepN,
  kSweepGamma,
  kCompareVariants,
  kTune,
  kVerifyLemma,
  kVerifyGap,
  kVerify,
  kBounds,
};
std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

enum class InitDistribution { kUniform, kNormal };
std::string to_string(InitDistribution init);
InitDistribution parse_init(const std::string& name);

/// A named topology instance with its Metropolis-Hastings matrix.
struct Topology {
  std::string name;  // "path", "ring", "complete" or "file:<path>"
  Graph graph;
  MixingMatrix mixing;
};

/// `name` is path|ring|complete|file:<path>. For files n is taken from the
/// file and the argument is ignored.
Topology make_topology(const std::string& name, std::size_t n);

/// Seed of trial `trial` in the instance keyed by `instance_key`:
///   base_seed ^ mix64(fnv1a64(instance_key) ^ trial)
std::uint64_t trial_seed(std::uint64_t base_seed, const std::string& instance_key,
                         std::size_t trial);

/// "topology/n/d". Variants and step sizes share it so that every cell of
/// an instance starts from the same X(0) for a given trial.
std::string instance_key(const std::string& topology, std::size_t n, std::size_t d);

/// X(0) drawn from Rng(mix64(seed ^ kInitStream)), row by row.
Matrix initial_state(std::size_t n, std::size_t d, InitDistribution init, std::uint64_t seed);

/// Tag folded into trial seeds for the X(0) stream, keeping it apart from
/// the compressor streams (seed ^ agent index).
inline constexpr std::uint64_t kInitStream = 0x8000000000000000ULL;

/// One (variant, topology, n, d, gamma, compressor) combination.
struct CellSpec {
  Variant variant = Variant::kSCG;
  std::string topology = "path";
  std::size_t n = 10;
  std::size_t d = 1;
  double gamma = 0.5;
  CompressorSpec compressor;
  std::optional<double> sigma_override;
  double epsilon = 1e-4;
  long max_rounds = 100000;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  InitDistribution init = InitDistribution::kUniform;

  AlgorithmConfig algorithm() const;
};

/// e.g. "SCG/path/n=10/d=50/gamma=0.5/qsgd_5".
std::string cell_id(const CellSpec& spec);

enum class TrialStatus { kConverged, kMaxRounds, kDiverged, kPruned, kError };
std::string to_string(TrialStatus status);

struct TrialOutcome {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  TrialStatus status = TrialStatus::kError;
  long rounds = 0;  // rounds executed (rounds_to_eps when converged)
  std::uint64_t bits = 0;
  std::optional<RateFit> rate;
  std::string message;  // divergence or error text
  std::optional<RunTrace> trace;

  bool converged() const { return status == TrialStatus::kConverged; }
};

/// Runs one trial; `round_cap` (when smaller) replaces max_rounds and marks
/// an unfinished run as pruned instead of kMaxRounds.
TrialOutcome run_trial(const Topology& topo, const CellSpec& spec, std::size_t trial,
                       bool keep_trace, std::optional<long> round_cap = std::nullopt);

struct CellResult {
  CellSpec spec;
  double sigma = 0.0;
  std::vector<TrialOutcome> trials;
  std::string error;  // configuration error for the whole cell

  bool all_converged() const;
  std::size_t diverged_count() const;
  /// Means and sample standard deviations over trials. NaN unless every
  /// trial converged (std is NaN for a single trial).
  double mean_rounds() const;
  double std_rounds() const;
  double mean_bits() const;
  double std_bits() const;
  /// Mean fitted rho over converged trials with a rate fit, else NaN.
  double rho_mean() const;
};

CellResult run_cell(const Topology& topo, const CellSpec& spec, bool keep_traces);

struct TuneResult {
  CellSpec base;                    // gamma of the base is ignored
  std::vector<CellResult> candidates;  // in evaluation order (descending gamma)
  std::optional<std::size_t> best;     // index into candidates
  bool infeasible() const { return !best.has_value(); }
  const CellResult* best_cell() const { return best ? &candidates[*best] : nullptr; }
};

/// Grid search for the gamma with the smallest mean rounds-to-eps over
/// trials (ties to the smaller gamma). Candidates above the variant's
/// gamma limit are dropped. Later candidates stop early once they cannot
/// beat the incumbent; such cells carry pruned trials.
TuneResult tune_gamma(const Topology& topo, const CellSpec& base, std::span<const double> grid,
                      bool keep_traces);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSingleRun;
  std::string topology = "path";
  std::vector<std::size_t> n_values = {10};
  std::size_t d = 1;
  std::vector<Variant> variants = {Variant::kSCG};
  std::vector<double> gammas = {0.5};
  bool tune = false;
  CompressorSpec compressor = CompressorSpec::qsgd_k(5);
  std::optional<double> sigma_override;
  double epsilon = 1e-4;
  long max_rounds = 100000;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  InitDistribution init = InitDistribution::kUniform;
  double c = 1.0;  // constant of the zero-mean contraction bound
  std::size_t workers = 1;
  bool write_traces = true;

  /// Throws InvalidArgument naming the first bad field.
  void validate() const;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CellResult> cells;   // one per reported cell, fixed order
  std::vector<TuneResult> tuning;  // filled when config.tune
};

/// Runs every cell (or tuning job) of a run/sweep/compare/tune config on up
/// to `workers` threads. Output order depends only on the config.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string summary_csv(std::span<const CellResult> cells);
/// Per-run JSON metadata: config fields plus derived sigma, omega, lambda,
/// lambda~ (null where undefined) and the trial outcome.
std::string trace_sidecar(const CellResult& cell, const TrialOutcome& trial);
/// File stem for a trial's trace, e.g. "SCG_path_n10_d50_g0.5_qsgd_5_t3".
std::string trace_stem(const CellSpec& spec, std::size_t trial);

/// Writes summary.csv, tuning.csv (when tuning), config.json and
/// traces/<stem>.{csv,json} under `dir`.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst observed value
  double threshold = 0.0;  // limit it is compared against
  std::string detail;
};

struct VerifyOptions {
  bool lemma = true;
  bool gap = true;
  bool compressors = true;
  bool mixing = true;
  bool mean = true;
  /// Builds the mixing matrix that the invariant check inspects; defaults
  /// to Metropolis-Hastings. Tests swap in a broken matrix.
  std::function<Matrix(const Graph&)> mixing_builder;
  std::uint64_t seed = 0;
};

std::vector<CheckResult> verify_suite(const VerifyOptions& options = {});
std::string verify_report_json(std::span<const CheckResult> checks);

}  // namespace scg::harness
