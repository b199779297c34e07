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

// scgossip: command line front end for the consensus simulator.
//
//   scgossip run         --variant SCG --topology path --n 20 --d 50 --gamma 0.5
//   scgossip sweep-n     --variant CG SCG --n 10 20 40 --gamma 0.5 0.25 --tune
//   scgossip sweep-gamma --gamma 0.001 0.005 0.01 --n 2 4 8 --compressor qsgd_3
//   scgossip compare     --topology ring --n 120 --variant EG CG SEG SCG --tune
//   scgossip tune        --variant SCG --n 50 --gamma 0.5 0.1 0.05
//   scgossip verify      [--only lemma|gap]
//   scgossip bounds      --n 50 --gamma 0.5 --C 1
//
// Options may also come from a TOML/INI file given with --config.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <json.hpp>

#include "scg/errors.hpp"
#include "scg/harness.hpp"
#include "scg/theory.hpp"

namespace {

using scg::harness::ExperimentConfig;
using scg::harness::ExperimentKind;

struct Flags {
  std::string topology = "path";
  std::vector<std::size_t> n = {10};
  std::size_t d = 1;
  std::vector<std::string> variants = {"SCG"};
  std::vector<double> gammas = {0.5};
  bool tune = false;
  std::string compressor = "qsgd_k";
  int k = 5;
  std::optional<double> sigma;
  double epsilon = 1e-4;
  long max_rounds = 100000;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::string init = "uniform";
  double c = 1.0;
  std::size_t workers = 1;
  bool no_traces = false;
  std::string out = "out";
  std::string only;
};

ExperimentConfig to_config(const Flags& f, ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.topology = f.topology;
  cfg.n_values = f.n;
  cfg.d = f.d;
  cfg.variants.clear();
  for (const auto& v : f.variants) cfg.variants.push_back(scg::parse_variant(v));
  cfg.gammas = f.gammas;
  cfg.tune = f.tune || kind == ExperimentKind::kTune;
  cfg.compressor = scg::CompressorSpec::parse(f.compressor, f.k);
  cfg.sigma_override = f.sigma;
  cfg.epsilon = f.epsilon;
  cfg.max_rounds = f.max_rounds;
  cfg.trials = f.trials;
  cfg.base_seed = f.seed;
  cfg.init = scg::harness::parse_init(f.init);
  cfg.c = f.c;
  cfg.workers = f.workers;
  cfg.write_traces = !f.no_traces;
  return cfg;
}

int run_bounds(const ExperimentConfig& cfg) {
  nlohmann::ordered_json all = nlohmann::ordered_json::array();
  for (std::size_t n : cfg.n_values) {
    const auto topo = scg::harness::make_topology(cfg.topology, n);
    for (double g : cfg.gammas) {
      const auto bundle = scg::theory::compute_bundle(topo.graph.size(), g, topo.mixing, cfg.c);
      all.push_back(nlohmann::ordered_json::parse(scg::theory::to_json(bundle, cfg.topology)));
    }
  }
  std::cout << (all.size() == 1 ? all[0] : all).dump(2) << "\n";
  return 0;
}

int run_verify(const Flags& f) {
  scg::harness::VerifyOptions opt;
  opt.seed = f.seed;
  if (!f.only.empty()) {
    if (f.only != "lemma" && f.only != "gap") throw scg::InvalidArgument("--only: expected lemma or gap");
    opt.lemma = f.only == "lemma";
    opt.gap = f.only == "gap";
    opt.compressors = opt.mixing = opt.mean = false;
  }
  const auto checks = scg::harness::verify_suite(opt);
  std::cout << scg::harness::verify_report_json(checks);
  int status = 0;
  for (const auto& c : checks) {
    std::fprintf(stderr, "%s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str());
    if (!c.passed) status = 1;
  }
  return status;
}

int run_experiment(const Flags& f, ExperimentKind kind) {
  const auto cfg = to_config(f, kind);
  cfg.validate();
  if (kind == ExperimentKind::kBounds) return run_bounds(cfg);
  const auto result = scg::harness::run_experiment(cfg);
  scg::harness::write_outputs(result, f.out);
  std::cout << scg::harness::summary_csv(result.cells);
  for (const auto& c : result.cells)
    if (!c.error.empty()) std::fprintf(stderr, "%s: %s\n", scg::harness::cell_id(c.spec).c_str(), c.error.c_str());
  return 0;
}

void add_experiment_flags(CLI::App& app, Flags& f) {
  app.add_option("--topology", f.topology, "path, ring, complete or file:<edge list>");
  app.add_option("--n", f.n, "node counts")->expected(1, -1);
  app.add_option("--d", f.d, "vector dimension");
  app.add_option("--variant", f.variants, "EG, CG, SEG, SCG")->expected(1, -1);
  app.add_option("--gamma", f.gammas, "step sizes (grid when tuning)")->expected(1, -1);
  app.add_flag("--tune", f.tune, "grid-search gamma per (variant, n)");
  app.add_option("--compressor", f.compressor, "identity, rand_k, top_k, qsgd_k or e.g. qsgd_5");
  app.add_option("--k", f.k, "compressor parameter");
  app.add_option("--sigma", f.sigma, "momentum override in [0, 1)");
  app.add_option("--epsilon", f.epsilon, "target consensus error");
  app.add_option("--max-rounds", f.max_rounds, "round limit per run");
  app.add_option("--trials", f.trials, "seeds per cell");
  app.add_option("--seed", f.seed, "base seed");
  app.add_option("--init", f.init, "uniform or normal");
  app.add_option("--C", f.c, "constant of the zero-mean contraction bound");
  app.add_option("--workers", f.workers, "worker threads");
  app.add_flag("--no-traces", f.no_traces, "skip per-run trace files");
  app.add_option("--out", f.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed momentum gossip simulator"};
  app.set_config("--config", "", "TOML/INI file with option values");
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  add_experiment_flags(app, flags);
  app.add_option("--only", flags.only, "verify: run only the lemma or gap checks");

  const std::vector<std::pair<std::string, ExperimentKind>> commands = {
      {"run", ExperimentKind::kSingleRun},         {"sweep-n", ExperimentKind::kSweepN},
      {"sweep-gamma", ExperimentKind::kSweepGamma}, {"compare", ExperimentKind::kCompareVariants},
      {"tune", ExperimentKind::kTune},              {"verify", ExperimentKind::kVerify},
      {"bounds", ExperimentKind::kBounds},
  };
  ExperimentKind kind = ExperimentKind::kSingleRun;
  for (const auto& [name, k] : commands) {
    auto* sub = app.add_subcommand(name, "");
    sub->callback([&kind, k = k] { kind = k; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (kind == ExperimentKind::kVerify) return run_verify(flags);
    return run_experiment(flags, kind);
  } catch (const scg::InvalidArgument& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return 2;
  } catch (const scg::ParseError& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
