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

#include "scg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <thread>

#include "scg/errors.hpp"
#include "scg/random.hpp"
#include "scg/theory.hpp"

namespace scg::harness {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Runs fn(0..count-1) on up to `workers` threads. fn must not throw.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return kNaN;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

Json json_number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSingleRun: return "single-run";
    case ExperimentKind::kSweepN: return "sweep-n";
    case ExperimentKind::kSweepGamma: return "sweep-gamma";
    case ExperimentKind::kCompareVariants: return "compare-variants";
    case ExperimentKind::kTune: return "tune";
    case ExperimentKind::kVerifyLemma: return "verify-lemma";
    case ExperimentKind::kVerifyGap: return "verify-gap";
    case ExperimentKind::kVerify: return "verify";
    case ExperimentKind::kBounds: return "bounds";
  }
  return "?";
}

ExperimentKind parse_kind(const std::string& name) {
  const std::string s = lower(name);
  if (s == "single-run" || s == "run") return ExperimentKind::kSingleRun;
  if (s == "sweep-n") return ExperimentKind::kSweepN;
  if (s == "sweep-gamma") return ExperimentKind::kSweepGamma;
  if (s == "compare-variants" || s == "compare") return ExperimentKind::kCompareVariants;
  if (s == "tune") return ExperimentKind::kTune;
  if (s == "verify-lemma") return ExperimentKind::kVerifyLemma;
  if (s == "verify-gap") return ExperimentKind::kVerifyGap;
  if (s == "verify") return ExperimentKind::kVerify;
  if (s == "bounds") return ExperimentKind::kBounds;
  throw InvalidArgument("unknown experiment kind '" + name + "'");
}

std::string to_string(InitDistribution init) {
  return init == InitDistribution::kUniform ? "uniform" : "normal";
}

InitDistribution parse_init(const std::string& name) {
  const std::string s = lower(name);
  if (s == "uniform") return InitDistribution::kUniform;
  if (s == "normal") return InitDistribution::kNormal;
  throw InvalidArgument("unknown init distribution '" + name + "' (expected uniform or normal)");
}

Topology make_topology(const std::string& name, std::size_t n) {
  if (name.rfind("file:", 0) == 0) {
    Graph g = load_edge_list(name.substr(5));
    auto w = metropolis_hastings(g);
    return {name, std::move(g), std::move(w)};
  }
  Graph g = [&] {
    if (name == "path") return build_path(n);
    if (name == "ring") return build_ring(n);
    if (name == "complete") return build_complete(n);
    throw InvalidArgument("unknown topology '" + name + "' (expected path, ring, complete or file:<path>)");
  }();
  auto w = metropolis_hastings(g);
  return {name, std::move(g), std::move(w)};
}

std::string instance_key(const std::string& topology, std::size_t n, std::size_t d) {
  return topology + "/" + std::to_string(n) + "/" + std::to_string(d);
}

std::uint64_t trial_seed(std::uint64_t base_seed, const std::string& key, std::size_t trial) {
  return base_seed ^ mix64(fnv1a64(key) ^ static_cast<std::uint64_t>(trial));
}

Matrix initial_state(std::size_t n, std::size_t d, InitDistribution init, std::uint64_t seed) {
  Rng rng(mix64(seed ^ kInitStream));
  Matrix x(n, d);
  for (double& v : x.data()) v = init == InitDistribution::kUniform ? rng.uniform() : rng.normal();
  return x;
}

AlgorithmConfig CellSpec::algorithm() const {
  return AlgorithmConfig::make(variant, gamma, n, compressor, sigma_override);
}

std::string cell_id(const CellSpec& s) {
  std::string id = to_string(s.variant) + "/" + s.topology + "/n=" + std::to_string(s.n) +
                   "/d=" + std::to_string(s.d) + "/gamma=" + format_double(s.gamma) + "/" +
                   s.compressor.label();
  if (s.sigma_override) id += "/sigma=" + format_double(*s.sigma_override);
  return id;
}

std::string trace_stem(const CellSpec& s, std::size_t trial) {
  std::string topo = s.topology.rfind("file:", 0) == 0
                         ? "file-" + std::filesystem::path(s.topology.substr(5)).stem().string()
                         : s.topology;
  std::string stem = to_string(s.variant) + "_" + topo + "_n" + std::to_string(s.n) + "_d" +
                     std::to_string(s.d) + "_g" + format_double(s.gamma) + "_" +
                     s.compressor.label();
  if (s.sigma_override) stem += "_s" + format_double(*s.sigma_override);
  return sanitize(stem + "_t" + std::to_string(trial));
}

std::string to_string(TrialStatus status) {
  switch (status) {
    case TrialStatus::kConverged: return "converged";
    case TrialStatus::kMaxRounds: return "max_rounds";
    case TrialStatus::kDiverged: return "diverged";
    case TrialStatus::kPruned: return "pruned";
    case TrialStatus::kError: return "error";
  }
  return "?";
}

TrialOutcome run_trial(const Topology& topo, const CellSpec& spec, std::size_t trial,
                       bool keep_trace, std::optional<long> round_cap) {
  TrialOutcome out;
  out.trial = trial;
  out.seed = trial_seed(spec.base_seed, instance_key(spec.topology, topo.graph.size(), spec.d), trial);
  const long limit = round_cap ? std::min(*round_cap, spec.max_rounds) : spec.max_rounds;
  try {
    const Matrix x0 = initial_state(topo.graph.size(), spec.d, spec.init, out.seed);
    auto state = ConsensusState::init(x0, topo.graph, topo.mixing, spec.algorithm(), out.seed);
    try {
      RunTrace trace = run(state, spec.epsilon, limit, spec.topology);
      out.rounds = state.t();
      out.bits = trace.total_bits();
      if (trace.converged) {
        out.status = TrialStatus::kConverged;
      } else {
        out.status = limit < spec.max_rounds ? TrialStatus::kPruned : TrialStatus::kMaxRounds;
      }
      try {
        out.rate = fit_linear_rate(trace);
      } catch (const InvalidArgument&) {
        // too short to fit
      }
      if (keep_trace) out.trace = std::move(trace);
    } catch (const DivergenceError& e) {
      out.status = TrialStatus::kDiverged;
      out.rounds = e.round();
      out.bits = static_cast<std::uint64_t>(e.round()) * state.round_bits();
      out.message = e.what();
    }
  } catch (const std::exception& e) {
    out.status = TrialStatus::kError;
    out.message = e.what();
  }
  return out;
}

bool CellResult::all_converged() const {
  return error.empty() && !trials.empty() &&
         std::all_of(trials.begin(), trials.end(), [](const auto& t) { return t.converged(); });
}

std::size_t CellResult::diverged_count() const {
  return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const auto& t) {
    return t.status == TrialStatus::kDiverged;
  }));
}

namespace {

std::vector<double> collect(const CellResult& c, bool bits) {
  std::vector<double> v;
  for (const auto& t : c.trials)
    v.push_back(bits ? static_cast<double>(t.bits) : static_cast<double>(t.rounds));
  return v;
}

}  // namespace

double CellResult::mean_rounds() const { return all_converged() ? mean_of(collect(*this, false)) : kNaN; }
double CellResult::std_rounds() const { return all_converged() ? sample_std(collect(*this, false)) : kNaN; }
double CellResult::mean_bits() const { return all_converged() ? mean_of(collect(*this, true)) : kNaN; }
double CellResult::std_bits() const { return all_converged() ? sample_std(collect(*this, true)) : kNaN; }

double CellResult::rho_mean() const {
  std::vector<double> rhos;
  for (const auto& t : trials)
    if (t.converged() && t.rate) rhos.push_back(t.rate->rho);
  return rhos.empty() ? kNaN : mean_of(rhos);
}

namespace {

CellResult prepare_cell(const CellSpec& spec) {
  CellResult cell;
  cell.spec = spec;
  try {
    const auto cfg = spec.algorithm();
    cfg.validate(spec.n, spec.d);
    cell.sigma = cfg.sigma;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

CellResult run_cell(const Topology& topo, const CellSpec& spec, bool keep_traces) {
  CellResult cell = prepare_cell(spec);
  if (!cell.error.empty()) return cell;
  for (std::size_t k = 0; k < spec.trials; ++k) cell.trials.push_back(run_trial(topo, spec, k, keep_traces));
  return cell;
}

TuneResult tune_gamma(const Topology& topo, const CellSpec& base, std::span<const double> grid,
                      bool keep_traces) {
  if (grid.empty()) throw InvalidArgument("tune_gamma: empty gamma grid");
  std::vector<double> gammas;
  for (double g : grid)
    if (g > 0.0 && g <= max_gamma(base.variant)) gammas.push_back(g);
  if (gammas.empty())
    throw InvalidArgument("tune_gamma: no grid point inside (0, " + format_double(max_gamma(base.variant)) +
                          "] for " + to_string(base.variant));
  std::sort(gammas.begin(), gammas.end(), std::greater<>());
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());

  TuneResult result;
  result.base = base;
  std::optional<long> best_total;
  for (double g : gammas) {
    CellSpec spec = base;
    spec.gamma = g;
    CellResult cell = prepare_cell(spec);
    if (cell.error.empty()) {
      long total = 0;
      bool failed = false;
      for (std::size_t k = 0; k < spec.trials; ++k) {
        if (failed) {
          TrialOutcome skipped;
          skipped.trial = k;
          skipped.seed = trial_seed(spec.base_seed, instance_key(spec.topology, spec.n, spec.d), k);
          skipped.status = TrialStatus::kPruned;
          skipped.message = "not run: an earlier trial did not converge";
          cell.trials.push_back(skipped);
          continue;
        }
        std::optional<long> cap;
        if (best_total) cap = *best_total - total;
        auto outcome = run_trial(topo, spec, k, keep_traces, cap);
        total += outcome.rounds;
        failed = !outcome.converged();
        cell.trials.push_back(std::move(outcome));
      }
      // Descending order: an equal total at a smaller gamma wins the tie.
      if (!failed && (!best_total || total <= *best_total)) {
        if (result.best) {
          for (auto& t : result.candidates[*result.best].trials) t.trace.reset();
        }
        best_total = total;
        result.best = result.candidates.size();
      } else {
        for (auto& t : cell.trials) t.trace.reset();
      }
    }
    result.candidates.push_back(std::move(cell));
  }
  return result;
}

void ExperimentConfig::validate() const {
  if (kind == ExperimentKind::kVerify || kind == ExperimentKind::kVerifyGap ||
      kind == ExperimentKind::kVerifyLemma)
    return;
  if (n_values.empty()) throw InvalidArgument("n: at least one value required");
  if (gammas.empty()) throw InvalidArgument("gamma: at least one value required");
  for (double g : gammas)
    if (!(g > 0.0 && g <= 1.0)) throw InvalidArgument("gamma: values must be in (0, 1]");
  if (!(c > 0.0)) throw InvalidArgument("C must be positive");
  if (topology.rfind("file:", 0) != 0) {
    for (std::size_t n : n_values) {
      const std::size_t min_n = topology == "ring" ? 3 : 2;
      if (n < min_n) throw InvalidArgument("n: " + topology + " needs n >= " + std::to_string(min_n));
    }
    if (topology != "path" && topology != "ring" && topology != "complete")
      throw InvalidArgument("topology: expected path, ring, complete or file:<path>");
  }
  if (kind == ExperimentKind::kBounds) {
    for (double g : gammas)
      if (g > 0.5) throw InvalidArgument("bounds: gamma must be in (0, 1/2]");
    return;
  }
  if (variants.empty()) throw InvalidArgument("variant: at least one value required");
  if (d == 0) throw InvalidArgument("d must be >= 1");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (max_rounds < 1) throw InvalidArgument("max_rounds must be >= 1");
  if (trials == 0) throw InvalidArgument("trials must be >= 1");
  if (workers == 0) throw InvalidArgument("workers must be >= 1");
  if (sigma_override && !(*sigma_override >= 0.0 && *sigma_override < 1.0))
    throw InvalidArgument("sigma must be in [0, 1)");
  scg::validate(compressor, d);
  if (kind == ExperimentKind::kSingleRun && !tune &&
      (variants.size() != 1 || n_values.size() != 1 || gammas.size() != 1))
    throw InvalidArgument("run: expects one variant, one n and one gamma");
  for (Variant v : variants) {
    const bool any = std::any_of(gammas.begin(), gammas.end(), [v](double g) { return g <= max_gamma(v); });
    if (!any)
      throw InvalidArgument("gamma: no value inside (0, " + format_double(max_gamma(v)) + "] for " +
                            to_string(v));
  }
}

namespace {

CellSpec base_spec(const ExperimentConfig& cfg, Variant v, std::size_t n) {
  CellSpec s;
  s.variant = v;
  s.topology = cfg.topology;
  s.n = n;
  s.d = cfg.d;
  s.compressor = uses_compression(v) ? cfg.compressor : CompressorSpec::identity();
  s.sigma_override = cfg.sigma_override;
  s.epsilon = cfg.epsilon;
  s.max_rounds = cfg.max_rounds;
  s.trials = cfg.trials;
  s.base_seed = cfg.base_seed;
  s.init = cfg.init;
  return s;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind == ExperimentKind::kVerify || cfg.kind == ExperimentKind::kVerifyGap ||
      cfg.kind == ExperimentKind::kVerifyLemma || cfg.kind == ExperimentKind::kBounds)
    throw InvalidArgument(to_string(cfg.kind) + " is not a run experiment");

  ExperimentResult result;
  result.config = cfg;

  // Topologies are built once per n and shared read-only.
  std::vector<Topology> topologies;
  for (std::size_t n : cfg.n_values) topologies.push_back(make_topology(cfg.topology, n));

  struct Job {
    std::size_t topo;
    CellSpec spec;
  };
  std::vector<Job> jobs;
  for (Variant v : cfg.variants) {
    for (std::size_t i = 0; i < topologies.size(); ++i) {
      CellSpec spec = base_spec(cfg, v, topologies[i].graph.size());
      if (cfg.tune) {
        jobs.push_back({i, spec});
        continue;
      }
      for (double g : cfg.gammas) {
        if (g > max_gamma(v)) continue;
        spec.gamma = g;
        jobs.push_back({i, spec});
      }
    }
  }

  if (cfg.tune) {
    result.tuning.resize(jobs.size());
    parallel_for(jobs.size(), cfg.workers, [&](std::size_t j) {
      result.tuning[j] = tune_gamma(topologies[jobs[j].topo], jobs[j].spec, cfg.gammas, cfg.write_traces);
    });
    for (const auto& t : result.tuning) {
      if (t.best) {
        result.cells.push_back(*t.best_cell());
      } else {
        result.cells.push_back(t.candidates.back());  // smallest gamma
      }
    }
    return result;
  }

  result.cells.resize(jobs.size());
  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    result.cells[j] = prepare_cell(jobs[j].spec);
    if (result.cells[j].error.empty()) {
      result.cells[j].trials.resize(cfg.trials);
      for (std::size_t k = 0; k < cfg.trials; ++k) tasks.emplace_back(j, k);
    }
  }
  parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
    const auto [j, k] = tasks[i];
    result.cells[j].trials[k] = run_trial(topologies[jobs[j].topo], jobs[j].spec, k, cfg.write_traces);
  });
  return result;
}

std::string summary_csv(std::span<const CellResult> cells) {
  std::ostringstream out;
  out << "cell_id,variant,topology,n,d,gamma,sigma,compressor,k,epsilon,trials,mean_rounds,"
         "std_rounds,mean_bits,std_bits,rho_mean,diverged_count\n";
  for (const auto& c : cells) {
    const auto& s = c.spec;
    out << cell_id(s) << ',' << to_string(s.variant) << ',' << s.topology << ',' << s.n << ','
        << s.d << ',' << format_double(s.gamma) << ',' << format_double(c.sigma) << ','
        << s.compressor.family() << ',' << s.compressor.k << ',' << format_double(s.epsilon) << ','
        << c.trials.size() << ',' << format_double(c.mean_rounds()) << ','
        << format_double(c.std_rounds()) << ',' << format_double(c.mean_bits()) << ','
        << format_double(c.std_bits()) << ',' << format_double(c.rho_mean()) << ','
        << c.diverged_count() << '\n';
  }
  return out.str();
}

std::string trace_sidecar(const CellResult& cell, const TrialOutcome& trial) {
  const auto& s = cell.spec;
  Json j;
  j["cell_id"] = cell_id(s);
  j["variant"] = to_string(s.variant);
  j["topology"] = s.topology;
  j["n"] = s.n;
  j["d"] = s.d;
  j["gamma"] = s.gamma;
  j["sigma"] = cell.sigma;
  j["sigma_overridden"] = s.sigma_override.has_value();
  j["compressor"] = s.compressor.family();
  j["k"] = s.compressor.k;
  j["omega"] = json_number(std::sqrt(scg::omega_squared(s.compressor, s.d)));
  const bool in_range = s.gamma > 0.0 && s.gamma <= 0.5 && s.n >= 2;
  j["lambda"] = in_range ? json_number(theory::rate_lambda(s.n, s.gamma)) : Json(nullptr);
  j["lambda_tilde"] = in_range ? json_number(theory::rate_lambda_tilde(s.n, s.gamma)) : Json(nullptr);
  j["epsilon"] = s.epsilon;
  j["max_rounds"] = s.max_rounds;
  j["trials"] = s.trials;
  j["base_seed"] = s.base_seed;
  j["init"] = to_string(s.init);
  j["trial"] = trial.trial;
  j["seed"] = trial.seed;
  j["status"] = to_string(trial.status);
  j["rounds"] = trial.rounds;
  j["bits"] = trial.bits;
  j["rho"] = trial.rate ? json_number(trial.rate->rho) : Json(nullptr);
  j["r_squared"] = trial.rate ? json_number(trial.rate->r_squared) : Json(nullptr);
  j["bit_model"] = "identity: 32 per coordinate; qsgd_k: k per coordinate + 32; rand_k/top_k: k*(32 + ceil(log2 d))";
  if (!trial.message.empty()) j["message"] = trial.message;
  return j.dump(2) + "\n";
}

namespace {

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["kind"] = to_string(c.kind);
  j["topology"] = c.topology;
  j["n"] = c.n_values;
  j["d"] = c.d;
  Json variants = Json::array();
  for (Variant v : c.variants) variants.push_back(to_string(v));
  j["variants"] = variants;
  j["gamma"] = c.gammas;
  j["tune"] = c.tune;
  j["compressor"] = c.compressor.family();
  j["k"] = c.compressor.k;
  j["sigma"] = c.sigma_override ? Json(*c.sigma_override) : Json(nullptr);
  j["epsilon"] = c.epsilon;
  j["max_rounds"] = c.max_rounds;
  j["trials"] = c.trials;
  j["base_seed"] = c.base_seed;
  j["init"] = to_string(c.init);
  j["C"] = c.c;
  return j;
}

void write_traces(const CellResult& cell, const std::filesystem::path& dir) {
  for (const auto& t : cell.trials) {
    const auto stem = trace_stem(cell.spec, t.trial);
    if (t.trace) write_file(dir / (stem + ".csv"), trace_csv(*t.trace));
    write_file(dir / (stem + ".json"), trace_sidecar(cell, t));
  }
}

}  // namespace

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "config.json", config_json(result.config).dump(2) + "\n");
  write_file(dir / "summary.csv", summary_csv(result.cells));
  if (!result.tuning.empty()) {
    std::vector<CellResult> all;
    for (const auto& t : result.tuning)
      for (const auto& c : t.candidates) all.push_back(c);
    write_file(dir / "tuning.csv", summary_csv(all));
  }
  if (!result.config.write_traces) return;
  const auto traces = dir / "traces";
  std::filesystem::create_directories(traces);
  if (!result.tuning.empty()) {
    for (const auto& t : result.tuning)
      if (t.best_cell()) write_traces(*t.best_cell(), traces);
    return;
  }
  for (const auto& c : result.cells) write_traces(c, traces);
}

// ---------------------------------------------------------------------------
// verify suite

namespace {

CheckResult check_mixing_invariants(const VerifyOptions& opt) {
  CheckResult r{"mixing-invariants", true, 0.0, kStochasticTolerance, ""};
  std::vector<std::pair<std::string, Graph>> graphs;
  graphs.emplace_back("path(10)", build_path(10));
  graphs.emplace_back("ring(10)", build_ring(10));
  graphs.emplace_back("complete(6)", build_complete(6));
  for (std::uint64_t s = 0; s < 20; ++s)
    graphs.emplace_back("random(" + std::to_string(s) + ")",
                        build_random_connected(5 + s % 20, s % 7, opt.seed ^ mix64(s)));
  for (const auto& [name, g] : graphs) {
    const Matrix w = opt.mixing_builder ? opt.mixing_builder(g) : metropolis_hastings(g).entries();
    const auto check = check_mixing(w, &g);
    r.measured = std::max(r.measured, check.max_row_sum_error);
    if (!check.ok()) {
      r.passed = false;
      if (r.detail.empty()) r.detail = name + ": " + check.describe();
    }
  }
  if (r.passed) r.detail = std::to_string(graphs.size()) + " graphs";
  return r;
}

CheckResult check_mean_preservation(const VerifyOptions& opt) {
  CheckResult r{"mean-preservation", true, 0.0, 1e-9, ""};
  const Graph g = build_path(20);
  const auto w = metropolis_hastings(g);
  for (Variant v : {Variant::kEG, Variant::kCG, Variant::kSEG, Variant::kSCG}) {
    for (std::uint64_t s = 0; s < 2; ++s) {
      const auto cfg = AlgorithmConfig::make(
          v, 0.5, 20, uses_compression(v) ? CompressorSpec::qsgd_k(5) : CompressorSpec::identity());
      const std::uint64_t seed = opt.seed ^ mix64(s + 1);
      const Matrix x0 = initial_state(20, 10, InitDistribution::kUniform, seed);
      auto state = ConsensusState::init(x0, g, w, cfg, seed);
      const auto m0 = state.target_mean();
      double scale = 0.0;
      for (double m : m0) scale = std::max(scale, std::abs(m));
      for (int t = 0; t < 200; ++t) state.step();
      for (const Matrix* m : {&state.x(), &state.y()}) {
        const auto mt = column_mean(*m);
        for (std::size_t c = 0; c < mt.size(); ++c)
          r.measured = std::max(r.measured, std::abs(mt[c] - m0[c]) / scale);
      }
    }
  }
  r.passed = r.measured <= r.threshold;
  r.detail = "max relative drift of column means over 200 rounds, 4 variants, path(20), d=10";
  return r;
}

CheckResult check_compressors(const VerifyOptions& opt) {
  CheckResult r{"compressor-contract", true, 0.0, 0.05, ""};
  Rng rng(opt.seed ^ 0xc0ffeeULL);
  auto random_vector = [&rng](std::size_t d) {
    std::vector<double> x(d);
    for (double& v : x) v = rng.normal();
    return x;
  };
  auto ratio = [](std::span<const double> x, std::span<const double> q) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      num += (q[i] - x[i]) * (q[i] - x[i]);
      den += x[i] * x[i];
    }
    return num / den;
  };
  std::ostringstream detail;
  const std::size_t draws = 4000;
  for (int k : {1, 10, 25}) {
    Compressor q(CompressorSpec::rand_k(k), 50, opt.seed ^ static_cast<std::uint64_t>(k));
    double sum = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
      const auto x = random_vector(50);
      sum += ratio(x, q.compress(x));
    }
    const double expected = 1.0 - k / 50.0;
    const double rel = std::abs(sum / static_cast<double>(draws) - expected) / expected;
    r.measured = std::max(r.measured, rel);
    detail << "rand_" << k << " rel.err " << format_double(rel) << "; ";
  }
  bool top_ok = true;
  for (std::size_t i = 0; i < 500; ++i) {
    const auto x = random_vector(50);
    Compressor q(CompressorSpec::top_k(10), 50, 0);
    if (ratio(x, q.compress(x)) > 1.0 - 10.0 / 50.0 + 1e-12) top_ok = false;
  }
  detail << "top_10 " << (top_ok ? "ok" : "violated") << "; ";
  Compressor qsgd(CompressorSpec::qsgd_k(5), 150, opt.seed ^ 5);
  double sum = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto x = random_vector(150);
    sum += ratio(x, qsgd.compress(x));
  }
  const double qsgd_ratio = sum / static_cast<double>(draws);
  const bool qsgd_ok = qsgd_ratio <= qsgd.omega_squared() * 1.05;
  detail << "qsgd_5 ratio " << format_double(qsgd_ratio) << " vs omega^2 " << format_double(qsgd.omega_squared());
  r.passed = r.measured <= r.threshold && top_ok && qsgd_ok;
  r.detail = detail.str();
  return r;
}

CheckResult check_gap(const VerifyOptions& opt) {
  CheckResult r{"gap-bound", true, std::numeric_limits<double>::infinity(), 0.0, ""};
  std::vector<std::pair<std::string, Graph>> graphs;
  for (std::size_t n : {10, 20, 50, 100, 200}) graphs.emplace_back("path(" + std::to_string(n) + ")", build_path(n));
  for (std::size_t n : {10, 50}) graphs.emplace_back("ring(" + std::to_string(n) + ")", build_ring(n));
  graphs.emplace_back("random(30)", build_random_connected(30, 10, opt.seed ^ 0x9a9ULL));
  std::ostringstream detail;
  for (const auto& [name, g] : graphs) {
    const auto w = metropolis_hastings(g);
    for (double gamma : {0.1, 0.5}) {
      const double gap = spectrum(lazy_mix(w, gamma)).spectral_gap;
      const double bound = theory::gap_lower_bound(g.size(), gamma);
      const double margin = gap - bound;
      r.measured = std::min(r.measured, margin);
      if (margin < 0.0) r.passed = false;
      detail << name << " gamma=" << format_double(gamma) << " delta=" << format_double(gap)
             << " bound=" << format_double(bound) << "; ";
    }
  }
  r.detail = detail.str();
  return r;
}

struct LemmaInstance {
  std::size_t n;
  double gamma;
};
constexpr LemmaInstance kLemmaInstances[] = {{5, 0.1}, {5, 0.5}, {10, 0.1}, {10, 0.5}, {20, 0.1}, {20, 0.5}};

CheckResult check_lemma_equal(const VerifyOptions& opt) {
  CheckResult r{"lemma-equal-blocks", true, 0.0, 1.0, ""};
  std::ostringstream detail;
  for (const auto& inst : kLemmaInstances) {
    const auto a = lazy_mix(metropolis_hastings(build_path(inst.n)), inst.gamma);
    const auto params = theory::lemma_parameters_for(a);
    const auto b = build_augmented(a, params.sigma);
    Rng rng(opt.seed ^ mix64(inst.n * 1000 + static_cast<std::size_t>(inst.gamma * 100)));
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      std::vector<double> v(2 * inst.n);
      for (std::size_t i = 0; i < inst.n; ++i) v[i] = v[inst.n + i] = rng.uniform();
      const auto norms = power_contraction(b, v, 500, ContractionCase::kEqualBlocks);
      for (std::size_t t = 0; t <= 500; ++t) {
        // ratio = ||B^t v - v_bar|| / (2 lambda^t ||v - v_bar||), in logs
        const double ratio = std::exp(std::log(norms[t]) - std::log(2.0 * norms[0]) -
                                      static_cast<double>(t) * std::log(params.lambda));
        worst = std::max(worst, ratio);
      }
    }
    r.measured = std::max(r.measured, worst);
    detail << "n=" << inst.n << " gamma=" << format_double(inst.gamma) << " p=" << format_double(params.p)
           << " max ratio " << format_double(worst) << "; ";
  }
  r.passed = r.measured <= r.threshold;
  r.detail = detail.str();
  return r;
}

CheckResult check_lemma_zero_mean(const VerifyOptions& opt) {
  CheckResult r{"lemma-zero-mean", true, 0.0, 2.0, ""};
  std::ostringstream detail;
  for (const auto& inst : kLemmaInstances) {
    const auto a = lazy_mix(metropolis_hastings(build_path(inst.n)), inst.gamma);
    const auto params = theory::lemma_parameters_for(a);
    const auto b = build_augmented(a, params.sigma);
    Rng rng(opt.seed ^ mix64(inst.n * 7919 + static_cast<std::size_t>(inst.gamma * 100)));
    double worst = 0.0, c_hat = 0.0;
    for (int k = 0; k < 10; ++k) {
      std::vector<double> v(2 * inst.n, 0.0);
      double mean = 0.0;
      for (std::size_t i = 0; i < inst.n; ++i) mean += (v[i] = rng.uniform());
      mean /= static_cast<double>(inst.n);
      for (std::size_t i = 0; i < inst.n; ++i) v[i] -= mean;
      const auto fit = theory::fit_contraction_constant(power_contraction(b, v, 500, ContractionCase::kZeroMean), params.lambda, 50, 500);
      const double ratio = fit.finite() ? fit.ratio() : std::numeric_limits<double>::infinity();
      worst = std::max(worst, ratio);
      c_hat = std::max(c_hat, fit.sup_hi);
    }
    r.measured = std::max(r.measured, worst);
    detail << "n=" << inst.n << " gamma=" << format_double(inst.gamma) << " C^=" << format_double(c_hat)
           << " sup ratio " << format_double(worst) << "; ";
  }
  r.passed = r.measured <= r.threshold;
  r.detail = detail.str();
  return r;
}

}  // namespace

std::vector<CheckResult> verify_suite(const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  auto guarded = [&out](const std::string& name, auto&& fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, kNaN, kNaN, std::string("error: ") + e.what()});
    }
  };
  if (opt.mixing) guarded("mixing-invariants", [&] { return check_mixing_invariants(opt); });
  if (opt.mean) guarded("mean-preservation", [&] { return check_mean_preservation(opt); });
  if (opt.compressors) guarded("compressor-contract", [&] { return check_compressors(opt); });
  if (opt.gap) guarded("gap-bound", [&] { return check_gap(opt); });
  if (opt.lemma) {
    guarded("lemma-equal-blocks", [&] { return check_lemma_equal(opt); });
    guarded("lemma-zero-mean", [&] { return check_lemma_zero_mean(opt); });
  }
  return out;
}

std::string verify_report_json(std::span<const CheckResult> checks) {
  Json report;
  bool all = true;
  Json list = Json::array();
  for (const auto& c : checks) {
    all = all && c.passed;
    Json j;
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["measured"] = json_number(c.measured);
    j["threshold"] = json_number(c.threshold);
    j["detail"] = c.detail;
    list.push_back(j);
  }
  report["passed"] = all;
  report["checks"] = list;
  return report.dump(2) + "\n";
}

}  // namespace scg::harness
