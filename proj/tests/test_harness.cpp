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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "scg/errors.hpp"
#include "scg/harness.hpp"
#include "scg/random.hpp"

using namespace scg;
using namespace scg::harness;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_sweep() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kSweepN;
  cfg.topology = "path";
  cfg.n_values = {4, 6};
  cfg.d = 8;
  cfg.variants = {Variant::kCG, Variant::kSCG};
  cfg.gammas = {0.5};
  cfg.trials = 3;
  cfg.epsilon = 1e-3;
  cfg.max_rounds = 20000;
  cfg.base_seed = 42;
  return cfg;
}

}  // namespace

TEST_CASE("seed derivation") {
  const std::string key = instance_key("path", 10, 50);
  CHECK(key == "path/10/50");
  CHECK(trial_seed(7, key, 3) == (7ULL ^ mix64(fnv1a64(key) ^ 3ULL)));
  CHECK(trial_seed(7, key, 3) != trial_seed(7, key, 4));
  CHECK(trial_seed(7, key, 3) != trial_seed(7, instance_key("ring", 10, 50), 3));
  const Matrix a = initial_state(5, 3, InitDistribution::kUniform, 9);
  CHECK(a == initial_state(5, 3, InitDistribution::kUniform, 9));
  CHECK_FALSE(a == initial_state(5, 3, InitDistribution::kUniform, 10));
  for (double v : a.data()) CHECK((v >= 0.0 && v < 1.0));
  Rng rng(mix64(9 ^ kInitStream));
  CHECK(a(0, 0) == rng.uniform());
  CHECK(initial_state(4, 2, InitDistribution::kNormal, 1) == initial_state(4, 2, InitDistribution::kNormal, 1));
}

TEST_CASE("names") {
  CHECK(parse_kind("sweep-n") == ExperimentKind::kSweepN);
  CHECK(parse_kind("compare") == ExperimentKind::kCompareVariants);
  CHECK(parse_kind("run") == ExperimentKind::kSingleRun);
  CHECK_THROWS_AS(parse_kind("walk"), InvalidArgument);
  CHECK(parse_init("normal") == InitDistribution::kNormal);
  CHECK_THROWS_AS(parse_init("cauchy"), InvalidArgument);
  CellSpec s;
  s.variant = Variant::kSCG;
  s.topology = "path";
  s.n = 10;
  s.d = 50;
  s.gamma = 0.5;
  s.compressor = CompressorSpec::qsgd_k(5);
  CHECK(cell_id(s) == "SCG/path/n=10/d=50/gamma=0.5/qsgd_5");
  CHECK(trace_stem(s, 3) == "SCG_path_n10_d50_g0.5_qsgd_5_t3");
}

TEST_CASE("topologies") {
  CHECK(make_topology("ring", 7).graph == build_ring(7));
  CHECK(make_topology("complete", 3).mixing.entries() == metropolis_hastings(build_complete(3)).entries());
  CHECK_THROWS_AS(make_topology("star", 5), InvalidArgument);
  const auto path = std::filesystem::temp_directory_path() / "scg_harness_edges.txt";
  {
    std::ofstream out(path);
    out << serialize_edge_list(build_path(5));
  }
  const auto t = make_topology("file:" + path.string(), 99);
  CHECK(t.graph == build_path(5));
  std::filesystem::remove(path);
}

TEST_CASE("trials do not depend on order or on other cells") {
  const auto topo = make_topology("ring", 8);
  CellSpec spec;
  spec.variant = Variant::kSCG;
  spec.topology = "ring";
  spec.n = 8;
  spec.d = 6;
  spec.gamma = 0.5;
  spec.compressor = CompressorSpec::qsgd_k(4);
  spec.epsilon = 1e-4;
  spec.trials = 3;
  spec.base_seed = 5;
  const auto cell = run_cell(topo, spec, false);
  REQUIRE(cell.trials.size() == 3);
  for (std::size_t k : {2, 0, 1}) {
    const auto alone = run_trial(topo, spec, k, false);
    CHECK(alone.seed == cell.trials[k].seed);
    CHECK(alone.rounds == cell.trials[k].rounds);
    CHECK(alone.bits == cell.trials[k].bits);
  }
  CHECK(cell.all_converged());
  CHECK(cell.mean_bits() == doctest::Approx(cell.mean_rounds() * 2 * 8 * (6 * 4 + 32)));
}

TEST_CASE("summary statistics") {
  CellResult cell;
  cell.trials.resize(3);
  const long rounds[] = {10, 20, 30};
  for (std::size_t k = 0; k < 3; ++k) {
    cell.trials[k].status = TrialStatus::kConverged;
    cell.trials[k].rounds = rounds[k];
    cell.trials[k].bits = 100 * rounds[k];
  }
  CHECK(cell.mean_rounds() == 20.0);
  CHECK(cell.std_rounds() == doctest::Approx(10.0));
  CHECK(cell.mean_bits() == 2000.0);
  CHECK(std::isnan(cell.rho_mean()));
  cell.trials[1].status = TrialStatus::kDiverged;
  CHECK(std::isnan(cell.mean_rounds()));
  CHECK(std::isnan(cell.std_bits()));
  CHECK(cell.diverged_count() == 1);
}

TEST_CASE("sweep output is reproducible") {
  const auto cfg = small_sweep();
  const auto a = run_experiment(cfg);
  auto parallel = cfg;
  parallel.workers = 3;
  const auto b = run_experiment(parallel);
  const std::string csv = summary_csv(a.cells);
  CHECK(csv == summary_csv(b.cells));
  CHECK(csv.rfind("cell_id,variant,topology,n,d,gamma,sigma,compressor,k,epsilon,trials,mean_rounds,"
                  "std_rounds,mean_bits,std_bits,rho_mean,diverged_count\n",
                  0) == 0);
  CHECK(a.cells.size() == 4);
  // Every variant sees the same X(0) for a trial.
  for (const auto& c : a.cells)
    for (std::size_t k = 0; k < c.trials.size(); ++k)
      CHECK(c.trials[k].seed == trial_seed(42, instance_key("path", c.spec.n, 8), k));
}

TEST_CASE("outputs on disk") {
  auto cfg = small_sweep();
  cfg.n_values = {4};
  cfg.trials = 2;
  const auto result = run_experiment(cfg);
  const auto dir = std::filesystem::temp_directory_path() / "scg_harness_out";
  std::filesystem::remove_all(dir);
  write_outputs(result, dir);
  CHECK(slurp(dir / "summary.csv") == summary_csv(result.cells));
  CHECK_FALSE(std::filesystem::exists(dir / "tuning.csv"));
  const auto config = nlohmann::json::parse(slurp(dir / "config.json"));
  CHECK(config["base_seed"] == 42);
  CHECK(config["variants"] == nlohmann::json::array({"CG", "SCG"}));

  const auto& cell = result.cells.back();
  const std::string stem = trace_stem(cell.spec, 1);
  const std::string csv = slurp(dir / "traces" / (stem + ".csv"));
  CHECK(csv.rfind("t,psi,bits_cumulative\n", 0) == 0);
  const auto side = nlohmann::json::parse(slurp(dir / "traces" / (stem + ".json")));
  CHECK(side["variant"] == "SCG");
  CHECK(side["n"] == 4);
  CHECK(side["trial"] == 1);
  CHECK(side["status"] == "converged");
  CHECK(side["sigma"].get<double>() == doctest::Approx(cell.sigma));
  CHECK(side["lambda"].get<double>() == doctest::Approx(1.0 - std::sqrt(0.5) / 20.0));
  CHECK(side["omega"].get<double>() == doctest::Approx(std::sqrt(omega_squared(CompressorSpec::qsgd_k(5), 8))));
  CHECK(side.contains("bit_model"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("sidecar has null lambda above gamma 1/2") {
  auto cfg = small_sweep();
  cfg.kind = ExperimentKind::kSingleRun;
  cfg.variants = {Variant::kCG};
  cfg.n_values = {4};
  cfg.gammas = {0.9};
  cfg.trials = 1;
  const auto r = run_experiment(cfg);
  REQUIRE(r.cells.size() == 1);
  const auto side = nlohmann::json::parse(trace_sidecar(r.cells[0], r.cells[0].trials[0]));
  CHECK(side["lambda"].is_null());
  CHECK(side["lambda_tilde"].is_null());
}

TEST_CASE("tuning") {
  const auto topo = make_topology("complete", 5);
  CellSpec base;
  base.variant = Variant::kEG;
  base.topology = "complete";
  base.n = 5;
  base.d = 3;
  base.epsilon = 1e-10;
  base.trials = 2;
  base.compressor = CompressorSpec::identity();

  const double one[] = {1.0};
  const auto t1 = tune_gamma(topo, base, one, false);
  REQUIRE(t1.best_cell());
  CHECK(t1.best_cell()->spec.gamma == 1.0);
  CHECK(t1.best_cell()->mean_rounds() == 1.0);

  // With a one-round budget only gamma = 1 reaches epsilon.
  base.max_rounds = 1;
  const double grid[] = {0.1, 1.0, 0.5, 0.5};
  const auto t2 = tune_gamma(topo, base, grid, false);
  REQUIRE(t2.candidates.size() == 3);
  CHECK(t2.candidates[0].spec.gamma == 1.0);
  CHECK(t2.candidates[2].spec.gamma == 0.1);
  REQUIRE(t2.best);
  CHECK(*t2.best == 0);
  for (std::size_t c = 1; c < 3; ++c) {
    CHECK_FALSE(t2.candidates[c].all_converged());
    CHECK(t2.candidates[c].trials.size() == 2);
    CHECK(t2.candidates[c].trials[1].status == TrialStatus::kPruned);
  }

  base.epsilon = 1e-300;
  const auto none = tune_gamma(topo, base, one, false);
  CHECK(none.infeasible());

  CHECK_THROWS_AS(tune_gamma(topo, base, std::span<const double>{}, false), InvalidArgument);
  base.variant = Variant::kSEG;
  CHECK_THROWS_AS(tune_gamma(topo, base, one, false), InvalidArgument);
}

TEST_CASE("tuned sweep reports the best candidate") {
  auto cfg = small_sweep();
  cfg.tune = true;
  cfg.n_values = {6};
  cfg.gammas = {0.5, 0.1, 0.9};
  const auto r = run_experiment(cfg);
  REQUIRE(r.tuning.size() == 2);
  REQUIRE(r.cells.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(r.tuning[i].best_cell());
    CHECK(r.cells[i].spec.gamma == r.tuning[i].best_cell()->spec.gamma);
    CHECK(r.cells[i].mean_rounds() == r.tuning[i].best_cell()->mean_rounds());
  }
  CHECK(r.tuning[0].candidates.size() == 3);  // CG admits 0.9
  CHECK(r.tuning[1].candidates.size() == 2);  // SCG does not
}

TEST_CASE("diverged runs are recorded") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kSingleRun;
  cfg.topology = "path";
  cfg.n_values = {4};
  cfg.d = 4;
  cfg.variants = {Variant::kCG};
  cfg.gammas = {1.0};
  cfg.sigma_override = 0.999;
  cfg.compressor = CompressorSpec::rand_k(1);
  cfg.trials = 2;
  cfg.epsilon = 1e-12;
  cfg.max_rounds = 100000;
  const auto r = run_experiment(cfg);
  REQUIRE(r.cells.size() == 1);
  const auto& cell = r.cells[0];
  REQUIRE(cell.trials.size() == 2);
  CHECK(cell.diverged_count() == 2);
  for (const auto& t : cell.trials) {
    CHECK(t.status == TrialStatus::kDiverged);
    CHECK(t.rounds > 0);
    CHECK_FALSE(t.message.empty());
  }
  CHECK(std::isnan(cell.mean_rounds()));
  const std::string csv = summary_csv(r.cells);
  CHECK(csv.find(",2\n") != std::string::npos);
}

TEST_CASE("experiment validation") {
  auto ok = small_sweep();
  CHECK_NOTHROW(ok.validate());
  auto bad = ok;
  bad.n_values.clear();
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = ok;
  bad.gammas = {0.0};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = ok;
  bad.topology = "ring";
  bad.n_values = {2};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = ok;
  bad.topology = "torus";
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = ok;
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = ok;
  bad.compressor = CompressorSpec::top_k(9);
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = ok;
  bad.sigma_override = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = ok;
  bad.variants = {Variant::kSCG};
  bad.gammas = {0.75};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = ok;
  bad.kind = ExperimentKind::kSingleRun;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = ok;
  bad.kind = ExperimentKind::kBounds;
  CHECK_THROWS_AS(run_experiment(bad), InvalidArgument);
}

TEST_CASE("verify suite") {
  VerifyOptions opt;
  opt.lemma = false;
  const auto checks = verify_suite(opt);
  REQUIRE(checks.size() == 4);
  for (const auto& c : checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
  const auto report = nlohmann::json::parse(verify_report_json(checks));
  CHECK(report["passed"] == true);
  CHECK(report["checks"].size() == 4);
}

TEST_CASE("verify suite catches a broken mixing matrix") {
  VerifyOptions opt;
  opt.lemma = opt.gap = opt.compressors = opt.mean = false;
  opt.mixing_builder = [](const Graph& g) {
    Matrix w = metropolis_hastings(g).entries();
    w(0, 0) += 1e-3;
    return w;
  };
  const auto checks = verify_suite(opt);
  REQUIRE(checks.size() == 1);
  CHECK(checks[0].name == "mixing-invariants");
  CHECK_FALSE(checks[0].passed);
}

TEST_CASE("lemma checks") {
  VerifyOptions opt;
  opt.gap = opt.compressors = opt.mixing = opt.mean = false;
  const auto checks = verify_suite(opt);
  REQUIRE(checks.size() == 2);
  CHECK(checks[0].name == "lemma-equal-blocks");
  CHECK(checks[1].name == "lemma-zero-mean");
  CHECK(checks[1].passed);
  // The equal-block ratio is not bounded by 1: with p = 1/sqrt(1 - lambda_2)
  // the second eigenvalue of B is a double root at lambda.
  CHECK(checks[0].measured > 1.0);
  CHECK_FALSE(checks[0].passed);
}
