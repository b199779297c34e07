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
#include <map>

#include "scg/compression.hpp"
#include "scg/dense.hpp"
#include "scg/errors.hpp"

using namespace scg;

namespace {

std::vector<double> gaussian(Rng& rng, std::size_t d) {
  std::vector<double> x(d);
  for (double& v : x) v = rng.normal();
  return x;
}

double relative_error(std::span<const double> x, std::span<const double> q) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (q[i] - x[i]) * (q[i] - x[i]);
    den += x[i] * x[i];
  }
  return num / den;
}

// E||rand_k(x) - x||^2 / ||x||^2 by enumerating every k-subset.
double rand_k_expectation(std::span<const double> x, std::size_t k) {
  const std::size_t d = x.size();
  double total = 0.0, norm2 = 0.0;
  std::size_t subsets = 0;
  for (double v : x) norm2 += v * v;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
    double dropped = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      if (!(mask & (1u << i))) dropped += x[i] * x[i];
    total += dropped / norm2;
    ++subsets;
  }
  return total / static_cast<double>(subsets);
}

double monte_carlo_ratio(Compressor& q, std::span<const std::vector<double>> xs, std::size_t draws) {
  double sum = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto& x = xs[i % xs.size()];
    sum += relative_error(x, q.compress(x));
  }
  return sum / static_cast<double>(draws);
}

}  // namespace

TEST_CASE("top_k keeps the largest magnitudes") {
  Compressor top1(CompressorSpec::top_k(1), 3, 0);
  CHECK(top1.compress(std::vector<double>{3, -1, 2}) == std::vector<double>{3, 0, 0});
  CHECK(top1.compress(std::vector<double>{1, -4, 2}) == std::vector<double>{0, -4, 0});
  Compressor top2(CompressorSpec::top_k(2), 3, 0);
  CHECK(top2.compress(std::vector<double>{2, -2, 2}) == std::vector<double>{2, -2, 0});
  CHECK(top2.compress(std::vector<double>{0, 0, 0}) == std::vector<double>{0, 0, 0});
}

TEST_CASE("top_k deterministic contract") {
  Rng rng(11);
  for (int k : {1, 5, 25, 50}) {
    Compressor q(CompressorSpec::top_k(k), 50, 0);
    for (int i = 0; i < 1000; ++i) {
      const auto x = gaussian(rng, 50);
      CHECK(relative_error(x, q.compress(x)) <= 1.0 - k / 50.0 + 1e-12);
    }
  }
}

TEST_CASE("rand_k with k = d is the identity") {
  Rng rng(2);
  Compressor q(CompressorSpec::rand_k(8), 8, 5);
  CHECK(q.omega() == 0.0);
  for (int i = 0; i < 20; ++i) {
    const auto x = gaussian(rng, 8);
    CHECK(q.compress(x) == x);
  }
}

TEST_CASE("rand_k matches the exact subset expectation") {
  Rng rng(7);
  for (std::size_t d : {3, 5, 6}) {
    for (std::size_t k = 1; k <= d; ++k) {
      const auto x = gaussian(rng, d);
      const double exact = rand_k_expectation(x, k);
      CHECK(exact == doctest::Approx(1.0 - double(k) / double(d)).epsilon(1e-12));
      Compressor q(CompressorSpec::rand_k(static_cast<int>(k)), d, 100 + k);
      const std::vector<std::vector<double>> xs = {x};
      const double mc = monte_carlo_ratio(q, xs, 20000);
      CHECK(std::abs(mc - exact) <= 0.05 * std::max(exact, 1e-12) + (exact == 0.0 ? 1e-15 : 0.0));
    }
  }
}

TEST_CASE("rand_k selects subsets uniformly") {
  Compressor q(CompressorSpec::rand_k(2), 5, 9);
  std::map<std::vector<int>, int> counts;
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const auto out = q.compress(x);
    std::vector<int> kept;
    for (int j = 0; j < 5; ++j)
      if (out[j] != 0.0) kept.push_back(j);
    CHECK(kept.size() == 2);
    ++counts[kept];
  }
  CHECK(counts.size() == 10);
  for (const auto& [subset, c] : counts) CHECK(std::abs(c - draws / 10) < 300);
}

TEST_CASE("contract holds by Monte Carlo") {
  Rng rng(13);
  std::vector<std::vector<double>> xs50, xs100, xs150;
  for (int i = 0; i < 20; ++i) {
    xs50.push_back(gaussian(rng, 50));
    xs100.push_back(gaussian(rng, 100));
    xs150.push_back(gaussian(rng, 150));
  }
  for (int k : {1, 10, 25}) {
    Compressor q(CompressorSpec::rand_k(k), 50, 17 + k);
    const double expected = 1.0 - k / 50.0;
    CHECK(std::abs(monte_carlo_ratio(q, xs50, 10000) - expected) <= 0.05 * expected);
  }
  Compressor qsgd5(CompressorSpec::qsgd_k(5), 150, 1);
  CHECK(monte_carlo_ratio(qsgd5, xs150, 10000) <= 0.4 * 1.05);
  Compressor qsgd3(CompressorSpec::qsgd_k(3), 100, 2);
  CHECK(monte_carlo_ratio(qsgd3, xs100, 10000) <= qsgd3.omega_squared() * 1.05);
  Compressor qsgd2(CompressorSpec::qsgd_k(2), 50, 3);
  CHECK(monte_carlo_ratio(qsgd2, xs50, 10000) <= qsgd2.omega_squared() * 1.05);
}

TEST_CASE("qsgd omega and message size") {
  CHECK(omega_squared(CompressorSpec::qsgd_k(5), 150) == doctest::Approx(0.4).epsilon(1e-15));
  Compressor q(CompressorSpec::qsgd_k(5), 150, 0);
  CHECK(q.omega() == doctest::Approx(std::sqrt(0.4)).epsilon(1e-15));
  CHECK(q.omega() == doctest::Approx(0.6325).epsilon(1e-4));
  CHECK(q.message_bits() == 782);
  // u = 3, tau = 1 + min(100/9, 10/3) = 13/3
  CHECK(omega_squared(CompressorSpec::qsgd_k(3), 100) == doctest::Approx(10.0 / 13).epsilon(1e-15));
}

TEST_CASE("omega of sparsifiers and identity") {
  CHECK(Compressor(CompressorSpec::top_k(75), 150, 0).omega() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(Compressor(CompressorSpec::rand_k(150), 150, 0).omega() == 0.0);
  CHECK(Compressor(CompressorSpec::identity(), 150, 0).omega() == 0.0);
}

TEST_CASE("message bits") {
  CHECK(Compressor(CompressorSpec::identity(), 150, 0).message_bits() == 4800);
  CHECK(Compressor(CompressorSpec::rand_k(10), 150, 0).message_bits() == 400);
  CHECK(Compressor(CompressorSpec::top_k(10), 150, 0).message_bits() == 400);
  CHECK(Compressor(CompressorSpec::top_k(1), 1, 0).message_bits() == 32);
  CHECK(Compressor(CompressorSpec::rand_k(3), 128, 0).message_bits() == 3 * (32 + 7));
}

TEST_CASE("qsgd output lies on the level grid") {
  Rng rng(21);
  Compressor q(CompressorSpec::qsgd_k(4), 30, 4);
  const double u = 7.0, tau = 1.0 + std::min(30.0 / 49.0, std::sqrt(30.0) / 7.0);
  for (int i = 0; i < 200; ++i) {
    auto x = gaussian(rng, 30);
    x[3] = 0.0;
    const double norm = euclidean_norm(x);
    const auto out = q.compress(x);
    CHECK(out[3] == 0.0);
    for (std::size_t j = 0; j < 30; ++j) {
      const double level = std::abs(out[j]) * u * tau / norm;
      CHECK(std::abs(level - std::round(level)) < 1e-9);
      CHECK(std::round(level) <= u);
      CHECK(std::round(level) >= std::floor(u * std::abs(x[j]) / norm) - 1e-9);
      CHECK(std::round(level) <= std::floor(u * std::abs(x[j]) / norm) + 1 + 1e-9);
      if (out[j] != 0.0) CHECK((out[j] > 0) == (x[j] > 0));
    }
  }
}

TEST_CASE("qsgd mean is x / tau") {
  const std::vector<double> x = {0.3, -1.2, 0.05, 2.0, -0.7};
  Compressor q(CompressorSpec::qsgd_k(3), 5, 8);
  const double tau = 1.0 + std::min(5.0 / 9.0, std::sqrt(5.0) / 3.0);
  std::vector<double> mean(5, 0.0);
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    const auto out = q.compress(x);
    for (int j = 0; j < 5; ++j) mean[j] += out[j] / draws;
  }
  for (int j = 0; j < 5; ++j) CHECK(mean[j] == doctest::Approx(x[j] / tau).epsilon(0.02));
}

TEST_CASE("qsgd of the zero vector") {
  Compressor q(CompressorSpec::qsgd_k(5), 4, 0);
  CHECK(q.compress(std::vector<double>(4, 0.0)) == std::vector<double>(4, 0.0));
}

TEST_CASE("support size of sparsifiers") {
  Rng rng(5);
  Compressor r(CompressorSpec::rand_k(7), 40, 1), t(CompressorSpec::top_k(7), 40, 1);
  for (int i = 0; i < 100; ++i) {
    const auto x = gaussian(rng, 40);
    for (auto* q : {&r, &t}) {
      const auto out = q->compress(x);
      CHECK(std::count_if(out.begin(), out.end(), [](double v) { return v != 0.0; }) <= 7);
    }
  }
}

TEST_CASE("same seed gives the same stream") {
  Rng rng(1);
  const auto x = gaussian(rng, 20);
  for (auto spec : {CompressorSpec::rand_k(4), CompressorSpec::qsgd_k(3)}) {
    Compressor a(spec, 20, 42), b(spec, 20, 42), c(spec, 20, 43);
    bool differs = false;
    for (int i = 0; i < 10; ++i) {
      const auto qa = a.compress(x);
      CHECK(qa == b.compress(x));
      differs = differs || qa != c.compress(x);
    }
    CHECK(differs);
  }
}

TEST_CASE("invalid configurations") {
  CHECK_THROWS_AS(Compressor(CompressorSpec::rand_k(0), 10, 0), InvalidArgument);
  CHECK_THROWS_AS(Compressor(CompressorSpec::top_k(11), 10, 0), InvalidArgument);
  CHECK_THROWS_AS(Compressor(CompressorSpec::qsgd_k(1), 10, 0), InvalidArgument);
  CHECK_THROWS_AS(Compressor(CompressorSpec::qsgd_k(33), 10, 0), InvalidArgument);
  CHECK_THROWS_AS(Compressor(CompressorSpec::identity(), 0, 0), InvalidArgument);
  Compressor q(CompressorSpec::top_k(2), 4, 0);
  CHECK_THROWS_AS(q.compress(std::vector<double>(3, 1.0)), InvalidArgument);
}

TEST_CASE("compressor names") {
  CHECK(CompressorSpec::parse("identity") == CompressorSpec::identity());
  CHECK(CompressorSpec::parse("qsgd_5") == CompressorSpec::qsgd_k(5));
  CHECK(CompressorSpec::parse("qsgd_k", 3) == CompressorSpec::qsgd_k(3));
  CHECK(CompressorSpec::parse("top_k", 10) == CompressorSpec::top_k(10));
  CHECK(CompressorSpec::parse("rand_2") == CompressorSpec::rand_k(2));
  CHECK_THROWS_AS(CompressorSpec::parse("gzip"), InvalidArgument);
  CHECK_THROWS_AS(CompressorSpec::parse("qsgd_x"), InvalidArgument);
  CHECK(CompressorSpec::qsgd_k(5).label() == "qsgd_5");
  CHECK(CompressorSpec::qsgd_k(5).family() == "qsgd_k");
  CHECK(CompressorSpec::identity().label() == "identity");
}
