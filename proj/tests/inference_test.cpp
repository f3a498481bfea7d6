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

#include <cmath>

#include "fixtures.hpp"
#include "genli/errors.hpp"
#include "genli/inference.hpp"
#include "genli/trainer.hpp"

using namespace genli;
using genli::testing::small_batch;
using genli::testing::small_config;

namespace {

std::vector<data::Sample> mixed_batch() {
  std::vector<data::Sample> all;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto b = small_batch(seed);
    all.insert(all.end(), b.begin(), b.end());
  }
  return all;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CAPTURE(i);
    CHECK(std::abs(a[i] - b[i]) < tol);
  }
}

}  // namespace

TEST_CASE("GenLI engine matches the tape forward") {
  const auto batch = mixed_batch();
  for (int ablate = -1; ablate < 3; ++ablate) {
    GenliConfig cfg = small_config();
    cfg.interest_hidden = {12, 10};
    if (ablate >= 0) cfg.use_kind[ablate] = false;
    const GenliModel model(cfg);
    nn::ParameterStore store;
    model.init(store, 31);
    CAPTURE(ablate);
    const auto reference = predict(model, store, batch);
    StageTimes times;
    check_close(GenliEngine<double>(model, store).predict(batch, &times), reference, 1e-10);
    CHECK(times.total_ms() >= 0.0);
    check_close(GenliEngine<float>(model, store).predict(batch), reference, 1e-4);
  }
}

TEST_CASE("GenLI engine matches the tape forward at the default sizes") {
  Rng rng(4);
  std::vector<data::Sample> batch;
  for (std::uint64_t u = 0; u < 6; ++u) {
    auto h = testing::random_history(rng, 300, 50 + rng.below(250), 5000, 50);
    for (int c = 0; c < 3; ++c) batch.push_back(testing::random_sample(rng, h, 5000, 50, u));
  }
  GenliConfig cfg;
  cfg.embedding.item_vocab_size = 5000;
  cfg.embedding.category_vocab_size = 50;
  const GenliModel model(cfg);
  nn::ParameterStore store;
  model.init(store, 8);
  check_close(GenliEngine<double>(model, store).predict(batch), predict(model, store, batch),
              1e-10);
}

TEST_CASE("TWIN engine matches the tape forward") {
  const auto batch = mixed_batch();
  BaselineConfig cfg;
  cfg.embedding.item_vocab_size = 40;
  cfg.embedding.category_vocab_size = 8;
  cfg.method = ScoringMethod::kTwinAttention;
  cfg.top_k = 5;
  cfg.window = 4;
  const BaselineModel model(cfg);
  nn::ParameterStore store;
  model.init(store, 13);
  const auto reference = predict(model, store, batch);
  check_close(TwinEngine<double>(model, store).predict(batch), reference, 1e-10);
  check_close(TwinEngine<float>(model, store).predict(batch), reference, 1e-4);

  BaselineConfig soft = cfg;
  soft.method = ScoringMethod::kSimSoft;
  const BaselineModel other(soft);
  CHECK_THROWS_AS(TwinEngine<double>(other, store), ConfigError);
}

TEST_CASE("engines reject empty batches") {
  const GenliModel model(small_config());
  nn::ParameterStore store;
  model.init(store, 1);
  CHECK_THROWS_AS(GenliEngine<double>(model, store).predict({}), DataError);
}
