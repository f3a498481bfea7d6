// Copyright 2026 The GenLI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "genli/errors.hpp"
#include "genli/evalbench.hpp"
#include "genli/metrics.hpp"

using namespace genli;

namespace {

double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("auc on hand-checked examples") {
  CHECK(auc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}) == doctest::Approx(1.0));
  CHECK(auc(std::vector<double>{0.4, 0.4}, std::vector<int>{1, 0}) == doctest::Approx(0.5));
  CHECK(auc(std::vector<double>{0.8, 0.7, 0.6, 0.5}, std::vector<int>{1, 0, 1, 0}) ==
        doctest::Approx(0.75));
  CHECK_THROWS_AS(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), DataError);
}

TEST_CASE("auc matches the pairwise definition and ignores monotone transforms") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(40);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(6)) / 5.0;  // plenty of ties
      y[i] = static_cast<int>(i % 2);
    }
    const double a = auc(s, y);
    CHECK(a == doctest::Approx(pairwise_auc(s, y)).epsilon(1e-12));
    for (double& v : s) v = 10.0 + std::exp(v);
    CHECK(auc(s, y) == doctest::Approx(a).epsilon(1e-12));
  }
}

TEST_CASE("random scores give auc near one half") {
  Rng rng(8);
  std::vector<double> s(20000);
  std::vector<int> y(20000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = rng.uniform();
    y[i] = static_cast<int>(i % 2);
  }
  CHECK(std::abs(auc(s, y) - 0.5) < 0.05);
}

TEST_CASE("summarize reports median, mean and nearest-rank p99") {
  const Dispersion d = summarize({5, 1, 3, 2, 4});
  CHECK(d.median == 3.0);
  CHECK(d.mean == 3.0);
  CHECK(d.p99 == 5.0);
  std::vector<double> v(200);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i + 1);
  const Dispersion e = summarize(v);
  CHECK(e.median == 100.5);
  CHECK(e.p99 == 198.0);
  CHECK_THROWS_AS(summarize({}), DataError);
}

TEST_CASE("linear fit r2") {
  CHECK(linear_fit_r2({1, 2, 3, 4}, {3, 5, 7, 9}) == doctest::Approx(1.0));
  CHECK(linear_fit_r2({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(0.64));
  CHECK_THROWS_AS(linear_fit_r2({1, 1}, {1, 2}), DataError);
}

TEST_CASE("linear fit r2 stays within [0, 1]") {
  Rng rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + rng.below(10);
    const double slope = rng.uniform(-1e3, 1e3), offset = rng.uniform(-1e6, 1e6);
    const double noise = trial % 2 == 0 ? 0.0 : rng.uniform(0.0, 10.0);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = 1000.0 * static_cast<double>(1u << i) * rng.uniform(0.9, 1.1);
      y[i] = slope * x[i] + offset + noise * rng.uniform(-1.0, 1.0);
    }
    const double r2 = linear_fit_r2(x, y);
    CHECK(r2 >= 0.0);
    CHECK(r2 <= 1.0);
  }
}

TEST_CASE("eval of a random model on balanced data is near chance") {
  const GenliConfig cfg = testing::small_config(200, 20);
  const GenliModel model(cfg);
  nn::ParameterStore store;
  model.init(store, 4);
  Rng rng(21);
  data::Dataset ds;
  for (std::uint64_t u = 0; u < 400; ++u) {
    auto h = testing::random_history(rng, 16, 1 + rng.below(16), 200, 20);
    for (int j = 0; j < 10; ++j) {
      data::Sample s = testing::random_sample(rng, h, 200, 20, u);
      s.label = j % 2;
      ds.samples.push_back(s);
    }
  }
  const EvalReport r = eval_model(model, store, ds, 256);
  CHECK(r.samples == 4000);
  CHECK(r.positives == 2000);
  CHECK(std::abs(r.auc - 0.5) < 0.05);
  CHECK(r.log_loss > 0.5);

  const auto dir = std::filesystem::temp_directory_path() / "genli_evalbench_test";
  write_eval_report(r, dir / "a.csv", false);
  write_eval_report(eval_model(model, store, ds, 1000), dir / "b.csv", false);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  write_eval_report(r, dir / "c.csv", true);
  CHECK(slurp(dir / "c.csv").find("total_ms") != std::string::npos);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(eval_model(model, store, data::Dataset{}), DataError);
}

TEST_CASE("scoring bench covers the grid") {
  ScoringBenchConfig cfg;
  cfg.lengths = {100, 400};
  cfg.head_dims = {8, 16};
  cfg.length = 100;
  cfg.head_dim = 8;
  cfg.repetitions = 3;
  cfg.min_repetition_ms = 0.1;
  const auto results = bench_scoring(cfg);
  // (100,8), (400,8), (100,16) for each method.
  CHECK(results.size() == 3 * cfg.methods.size());
  for (ScoringMethod m : cfg.methods) {
    for (auto [len, dh] : {std::pair<std::size_t, std::size_t>{100, 8}, {400, 8}, {100, 16}}) {
      const BenchResult* r = find_result(results, m, len, dh);
      REQUIRE(r != nullptr);
      CHECK(r->repetitions == 3);
      CHECK(r->inner >= 1);
      CHECK(r->ns_per_behavior.median > 0.0);
      CHECK(r->ns_per_behavior.p99 >= r->ns_per_behavior.median);
      CHECK(r->total_ms > 0.0);
    }
  }
  CHECK(find_result(results, ScoringMethod::kEtaSimhash, 100, 8)->bits == 64);
  CHECK(find_result(results, ScoringMethod::kSimHard, 400, 16) == nullptr);

  const ScalingSummary s = summarize_scaling(results, cfg);
  CHECK(s.lookup_length_r2 >= 0.0);
  CHECK(s.lookup_length_r2 <= 1.0);
  CHECK(s.lookup_head_dim_ratio > 0.0);
  CHECK(s.inner_product_head_dim_ratio > 0.0);
  CHECK(s.lookup_ns == find_result(results, ScoringMethod::kGenliLookup, 100, 8)->ns_per_behavior.median);

  ScoringBenchConfig lookup_only = cfg;
  lookup_only.methods = {ScoringMethod::kGenliLookup};
  CHECK_THROWS_AS(summarize_scaling(bench_scoring(lookup_only), cfg), ConfigError);

  cfg.repetitions = 0;
  CHECK_THROWS_AS(bench_scoring(cfg), ConfigError);
}

TEST_CASE("latency bench reports both models per request shape") {
  LatencyBenchConfig cfg;
  cfg.batch = 64;
  cfg.length = 50;
  cfg.candidates_per_user = {8, 1};
  cfg.items = 500;
  cfg.categories = 20;
  cfg.repetitions = 2;
  const auto results = bench_latency(cfg);
  REQUIRE(results.size() == 4);
  CHECK(results[0].model == "genli");
  CHECK(results[1].model == "twin_attention");
  CHECK(results[2].candidates_per_user == 1);
  for (const auto& r : results) {
    CHECK(r.batch_ms.median > 0.0);
    CHECK(r.mean_stages.total_ms() > 0.0);
    CHECK(r.mean_stages.total_ms() <= r.batch_ms.mean * 1.5);
  }
  cfg.candidates_per_user = {0};
  CHECK_THROWS_AS(bench_latency(cfg), ConfigError);
}
