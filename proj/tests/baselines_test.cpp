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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "fixtures.hpp"
#include "genli/baselines.hpp"
#include "genli/errors.hpp"
#include "genli/trainer.hpp"

using namespace genli;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

// Full-sort oracle: score descending, position ascending, padded to k.
std::vector<std::size_t> sort_oracle(const std::vector<double>& scores,
                                     const std::vector<std::uint8_t>& mask, std::size_t k) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (mask[i]) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  idx.resize(std::min(idx.size(), k));
  idx.resize(k, kPaddingPosition);
  return idx;
}

BaselineConfig config_for(ScoringMethod m, std::size_t items, std::size_t categories,
                          std::size_t k) {
  BaselineConfig cfg;
  cfg.embedding.item_vocab_size = items;
  cfg.embedding.category_vocab_size = categories;
  cfg.method = m;
  cfg.top_k = k;
  cfg.ctr_hidden = {12, 10};
  return cfg;
}

// Concatenated item and category rows read straight from the store.
std::vector<double> model_embed(const BaselineModel&, const nn::ParameterStore& store,
                                const data::Behavior& b) {
  std::vector<double> e;
  const auto& items = store.at("embedding.item").value;
  const auto& cats = store.at("embedding.category").value;
  for (std::size_t c = 0; c < items.cols(); ++c) e.push_back(items(b.item, c));
  for (std::size_t c = 0; c < cats.cols(); ++c) e.push_back(cats(b.category, c));
  return e;
}

}  // namespace

TEST_CASE("inner product scoring") {
  const std::vector<double> x{1, 0, 0, 0}, y{0, 1, 0, 0};
  CHECK(score_inner_product<double>(x, y) == 0.0);
  CHECK(score_inner_product<double>(x, x) == 1.0);
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_vector(rng, 8), b = random_vector(rng, 8);
    double loop = 0.0;
    for (std::size_t i = 0; i < 8; ++i) loop += a[i] * b[i];
    CHECK(score_inner_product<double>(a, b) == doctest::Approx(loop).epsilon(1e-12));
  }
}

TEST_CASE("category match scoring") {
  const data::Behavior a{1, 3, 0}, b{2, 3, 0}, c{1, 4, 0};
  CHECK(score_category_match(a, b) == 1.0);
  CHECK(score_category_match(a, c) == 0.0);
}

TEST_CASE("category match ties resolve to the most recent behavior") {
  std::vector<data::Behavior> bs;
  for (std::uint32_t i = 0; i < 12; ++i) bs.push_back({i + 1, 5, static_cast<std::int64_t>(i)});
  const auto seq = data::make_sequence(bs, 16);
  const data::Behavior target{99, 5, 100};
  const Selection s = select_topk(seq.length(), seq.mask, 4, [&](std::size_t i) {
    return score_category_match(seq.slots[i], target);
  });
  CHECK(s.positions == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("simhash extremes") {
  const SimHash h(8, 64, 3);
  Rng rng(2);
  const auto e = random_vector(rng, 8);
  std::vector<double> neg(e);
  for (double& v : neg) v = -v;
  const auto se = h.fingerprint(e), sn = h.fingerprint(neg);
  CHECK(SimHash::hamming(se.data(), se.data(), h.words()) == 0);
  CHECK(SimHash::hamming(se.data(), sn.data(), h.words()) == 64);
  CHECK(h.score(se.data(), se.data()) == 64.0);
  CHECK(h.score(se.data(), sn.data()) == 0.0);
  CHECK(h.fingerprint(e) == SimHash(8, 64, 3).fingerprint(e));
}

TEST_CASE("simhash bit collisions follow the angle") {
  const std::size_t m = 64;
  Rng rng(11);
  double measured = 0.0, expected = 0.0;
  std::vector<double> bin_measured(4, 0.0);
  std::vector<int> bin_count(4, 0);
  for (int pair = 0; pair < 1000; ++pair) {
    // Fresh hyperplanes per pair so that every pair is an independent draw.
    const SimHash h(8, m, 1000 + pair);
    const auto a = random_vector(rng, 8), b = random_vector(rng, 8);
    const double cos = score_inner_product<double>(a, b) /
                       std::sqrt(score_inner_product<double>(a, a) * score_inner_product<double>(b, b));
    const double theta = std::acos(std::clamp(cos, -1.0, 1.0));
    const auto sa = h.fingerprint(a), sb = h.fingerprint(b);
    const double rate = 1.0 - static_cast<double>(SimHash::hamming(sa.data(), sb.data(), h.words())) / m;
    measured += rate;
    expected += 1.0 - theta / std::numbers::pi;
    const auto bin = std::min<std::size_t>(3, static_cast<std::size_t>(theta / (std::numbers::pi / 4)));
    bin_measured[bin] += rate;
    ++bin_count[bin];
  }
  CHECK(std::abs(measured - expected) / 1000.0 < 0.03);
  // Collision frequency decreases with the angle.
  for (std::size_t i = 1; i < 4; ++i) {
    if (bin_count[i] == 0 || bin_count[i - 1] == 0) continue;
    CHECK(bin_measured[i] / bin_count[i] < bin_measured[i - 1] / bin_count[i - 1]);
  }
}

TEST_CASE("sdim collisions") {
  const SdimHasher h(8, 4, 6, 5);
  Rng rng(3);
  const auto e = random_vector(rng, 8);
  const auto be = h.buckets(e);
  CHECK(h.collisions(be.data(), be.data()) == 4);
  const auto sel = sdim_collision_select(h, be, {}, be);
  CHECK(sel.positions == std::vector<std::size_t>{0});
  CHECK(sel.weights == std::vector<std::size_t>{4});

  // One round with pairwise distinct buckets: nothing collides.
  const SdimHasher one(8, 1, 8, 6);
  std::vector<std::uint32_t> buckets{1, 2, 3, 4};
  const std::vector<std::uint32_t> target{9};
  CHECK(sdim_collision_select(one, buckets, {}, target).positions.empty());
}

TEST_CASE("sdim selection matches exhaustive bucket comparison") {
  const std::size_t rounds = 4;
  const SdimHasher h(8, rounds, 3, 17);
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(200);
    std::vector<std::vector<std::uint32_t>> per;
    std::vector<std::uint32_t> flat;
    std::vector<std::uint8_t> mask(n);
    for (std::size_t i = 0; i < n; ++i) {
      per.push_back(h.buckets(random_vector(rng, 8)));
      flat.insert(flat.end(), per.back().begin(), per.back().end());
      mask[i] = rng.bernoulli(0.8) ? 1 : 0;
    }
    const auto target = h.buckets(random_vector(rng, 8));
    std::vector<std::size_t> pos, weight;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t c = 0;
      for (std::size_t r = 0; r < rounds; ++r) c += per[i][r] == target[r];
      if (mask[i] && c > 0) {
        pos.push_back(i);
        weight.push_back(c);
      }
    }
    const auto sel = sdim_collision_select(h, flat, mask, target);
    CHECK(sel.positions == pos);
    CHECK(sel.weights == weight);
  }
}

TEST_CASE("twin attention score") {
  const nn::Tensor2D id = testing::identity(8);
  std::vector<double> a(8, 0.0), b(8, 0.0);
  a[0] = 1.0;
  b[1] = 1.0;
  CHECK(twin_attention_score(a, b, id, id, 8) == 0.0);
  CHECK(twin_attention_score(a, a, id, id, 8) == doctest::Approx(1.0 / std::sqrt(8.0)));

  Rng rng(5);
  nn::Tensor2D wq(8, 32), wk(8, 32);
  for (double& v : wq.values()) v = rng.normal();
  for (double& v : wk.values()) v = rng.normal();
  const auto e_b = random_vector(rng, 8), e_t = random_vector(rng, 8);
  double s = 0.0;
  for (std::size_t c = 0; c < 32; ++c) {
    double q = 0.0, k = 0.0;
    for (std::size_t r = 0; r < 8; ++r) {
      q += e_t[r] * wq(r, c);
      k += e_b[r] * wk(r, c);
    }
    s += q * k;
  }
  CHECK(twin_attention_score(e_b, e_t, wq, wk, 8) == doctest::Approx(s / std::sqrt(8.0)));
}

TEST_CASE("average pooling feature") {
  nn::Tensor2D same(3, 4);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 4; ++c) same(r, c) = 0.5 * static_cast<double>(c) - 0.3;
  }
  const auto f = avg_pool_feature(same, {});
  for (std::size_t c = 0; c < 4; ++c) CHECK(f[c] == doctest::Approx(same(0, c)));

  nn::Tensor2D pm(2, 3);
  for (std::size_t c = 0; c < 3; ++c) {
    pm(0, c) = 1.0 + static_cast<double>(c);
    pm(1, c) = -pm(0, c);
  }
  for (double v : avg_pool_feature(pm, {})) CHECK(v == 0.0);

  Rng rng(6);
  nn::Tensor2D x(20, 8);
  for (double& v : x.values()) v = rng.normal();
  std::vector<std::uint8_t> mask(20);
  for (auto& m : mask) m = rng.bernoulli(0.6) ? 1 : 0;
  mask[0] = 1;
  std::vector<double> expect(8, 0.0);
  double n = 0.0;
  for (std::size_t r = 0; r < 20; ++r) {
    if (!mask[r]) continue;
    n += 1.0;
    for (std::size_t c = 0; c < 8; ++c) expect[c] += x(r, c);
  }
  const auto got = avg_pool_feature(x, mask);
  for (std::size_t c = 0; c < 8; ++c) CHECK(got[c] == doctest::Approx(expect[c] / n));
  CHECK_THROWS_AS(avg_pool_feature(x, std::vector<std::uint8_t>(20, 0)), DataError);
}

TEST_CASE("every baseline kernel retrieves its full-sort oracle") {
  const std::size_t items = 300, categories = 12;
  Rng rng(7);
  for (ScoringMethod m : {ScoringMethod::kSimHard, ScoringMethod::kSimSoft,
                          ScoringMethod::kEtaSimhash, ScoringMethod::kTwinAttention}) {
    CAPTURE(to_string(m));
    for (std::size_t length : {1u, 7u, 100u, 1000u, 10000u}) {
      const std::size_t k = 1 + rng.below(40);
      BaselineModel model(config_for(m, items, categories, k));
      nn::ParameterStore store;
      model.init(store, length);
      const auto hist = testing::random_history(rng, length, 1 + rng.below(length), items, categories);
      const data::Behavior target{static_cast<std::uint32_t>(1 + rng.below(items - 1)),
                                  static_cast<std::uint32_t>(1 + rng.below(categories - 1)), 0};
      const auto e_t = model_embed(model, store, target);
      std::vector<double> scores(length, 0.0);
      const SimHash hash(8, model.config().hash_bits, model.config().hash_seed);
      const auto sig_t = hash.fingerprint(e_t);
      for (std::size_t i = 0; i < length; ++i) {
        if (!hist->mask[i]) continue;
        const auto e_b = model_embed(model, store, hist->slots[i]);
        switch (m) {
          case ScoringMethod::kSimHard:
            scores[i] = hist->slots[i].category == target.category ? 1.0 : 0.0;
            break;
          case ScoringMethod::kSimSoft:
            for (std::size_t c = 0; c < 8; ++c) scores[i] += e_b[c] * e_t[c];
            break;
          case ScoringMethod::kEtaSimhash: {
            const auto sig_b = hash.fingerprint(e_b);
            scores[i] = 64.0 - static_cast<double>(SimHash::hamming(sig_b.data(), sig_t.data(), hash.words()));
            break;
          }
          default:
            scores[i] = twin_attention_score(e_b, e_t, store.at("baseline.esu.w_q").value,
                                             store.at("baseline.esu.w_k").value, 8);
        }
      }
      CAPTURE(length);
      CHECK(model.retrieve(store, *hist, target).positions == sort_oracle(scores, hist->mask, k));
    }
  }
}
