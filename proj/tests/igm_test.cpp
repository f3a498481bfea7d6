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
#include "genli/igm.hpp"
#include "genli/nn/ops.hpp"

using namespace genli;
using genli::testing::identity;

namespace {

InterestHeadConfig head_cfg(std::size_t heads, std::size_t head_dim, std::size_t n) {
  InterestHeadConfig cfg;
  cfg.behavior_dim = 8;
  cfg.heads = heads;
  cfg.head_dim = head_dim;
  cfg.distribution_size = n;
  return cfg;
}

nn::Tensor2D random_rows(Rng& rng, std::size_t rows, std::size_t cols) {
  nn::Tensor2D m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-1, 1);
  return m;
}

std::vector<double> row_vec(const nn::Tensor2D& m, std::size_t r) {
  return {m.row(r).begin(), m.row(r).end()};
}

nn::Tensor2D hidden_of(const InterestHead& head, nn::ParameterStore& store,
                       const nn::Tensor2D& window, std::size_t users, std::size_t l,
                       std::vector<std::uint8_t> valid) {
  nn::Tape t;
  return t.value(head.hidden_interest(t, store, t.constant(window), users, l, std::move(valid)));
}

}  // namespace

TEST_CASE("the short-term window is the first l valid slots") {
  auto seq = data::make_sequence({{1, 1, 5}, {2, 1, 4}, {3, 1, 3}}, 6);
  auto w = short_term_window(seq, 2);
  CHECK(w.behaviors[0].item == 1);
  CHECK(w.behaviors[1].item == 2);
  CHECK(w.mask == std::vector<std::uint8_t>{1, 1});
  auto wide = short_term_window(seq, 5);
  CHECK(wide.mask == std::vector<std::uint8_t>{1, 1, 1, 0, 0});
  CHECK(wide.valid_count() == 3);
  CHECK(wide.behaviors[4].is_padding());
  CHECK_THROWS_AS(short_term_window(seq, 0), ConfigError);
}

TEST_CASE("one-key window passes the value row through the projection") {
  InterestHead head("h", head_cfg(1, 8, 16));
  nn::ParameterStore store;
  Rng rng(1);
  head.init(store, rng);
  genli::testing::set_identity_mha(store, head.attention());
  Rng data_rng(2);
  nn::Tensor2D window = random_rows(data_rng, 1, 8);
  nn::Tensor2D h = hidden_of(head, store, window, 1, 1, {1});
  const nn::Tensor2D& wh = store.at(head.projection_name()).value;
  for (std::size_t c = 0; c < 8; ++c) {
    double want = 0.0;
    for (std::size_t r = 0; r < 16; ++r) want += window[r % 8] * wh(r, c);
    CHECK(h(0, c) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("duplicating every behavior leaves the hidden interest unchanged") {
  InterestHead head("h", head_cfg(4, 8, 32));
  nn::ParameterStore store;
  Rng rng(3);
  head.init(store, rng);
  Rng data_rng(4);
  nn::Tensor2D window = random_rows(data_rng, 5, 8);
  nn::Tensor2D doubled(10, 8);
  for (std::size_t r = 0; r < 10; ++r) {
    std::copy(window.row(r / 2).begin(), window.row(r / 2).end(), doubled.row(r).begin());
  }
  nn::Tensor2D a = hidden_of(head, store, window, 1, 5, std::vector<std::uint8_t>(5, 1));
  nn::Tensor2D b = hidden_of(head, store, doubled, 1, 10, std::vector<std::uint8_t>(10, 1));
  for (std::size_t c = 0; c < 8; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-12));
}

TEST_CASE("hidden interest matches a loop reference") {
  InterestHead head("h", head_cfg(4, 8, 32));
  nn::ParameterStore store;
  Rng rng(5);
  head.init(store, rng);
  Rng data_rng(6);
  // Two users, l=10; the second has only 7 valid rows.
  nn::Tensor2D window = random_rows(data_rng, 20, 8);
  std::vector<std::uint8_t> valid(20, 1);
  for (std::size_t r = 17; r < 20; ++r) valid[r] = 0;
  nn::Tensor2D h = hidden_of(head, store, window, 2, 10, valid);
  const nn::Tensor2D& eq = store.at(head.query_name()).value;
  const nn::Tensor2D& wh = store.at(head.projection_name()).value;
  for (std::size_t u = 0; u < 2; ++u) {
    std::vector<std::vector<double>> keys;
    for (std::size_t r = 0; r < 10; ++r) {
      if (valid[u * 10 + r]) keys.push_back(row_vec(window, u * 10 + r));
    }
    auto first = genli::testing::loop_mha(row_vec(window, u * 10), keys, store, head.attention());
    auto second = genli::testing::loop_mha(row_vec(eq, 0), keys, store, head.attention());
    first.insert(first.end(), second.begin(), second.end());
    for (std::size_t c = 0; c < 8; ++c) {
      double want = 0.0;
      for (std::size_t r = 0; r < 16; ++r) want += first[r] * wh(r, c);
      CHECK(h(u, c) == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("a user without behaviors is a data error") {
  InterestHead head("h", head_cfg(4, 8, 32));
  nn::ParameterStore store;
  Rng rng(5);
  head.init(store, rng);
  nn::Tensor2D window(4, 8);
  CHECK_THROWS_AS(hidden_of(head, store, window, 1, 4, {0, 0, 0, 0}), DataError);
}

TEST_CASE("zeroed output layer gives a uniform distribution") {
  InterestHead head("h", head_cfg(4, 8, 4096));
  nn::ParameterStore store;
  Rng rng(8);
  head.init(store, rng);
  const auto& last = head.mlp().layers().back();
  store.at(last.name() + ".w").value.fill(0.0);
  store.at(last.name() + ".b").value.fill(0.0);
  nn::Tape t;
  Rng data_rng(9);
  nn::Var p = head.generate_distribution(t, store, t.constant(random_rows(data_rng, 1, 8)));
  for (double v : t.value(p).values()) CHECK(v == doctest::Approx(1.0 / 4096).epsilon(1e-12));
}

TEST_CASE("generated distributions are normalized and reproducible") {
  auto run = [] {
    InterestHead head("h", head_cfg(4, 8, 4096));
    nn::ParameterStore store;
    Rng rng(21);
    head.init(store, rng);
    nn::Tape t;
    Rng data_rng(22);
    nn::Var p = head.generate_distribution(t, store, t.constant(random_rows(data_rng, 3, 8)));
    return t.value(p);
  };
  nn::Tensor2D p = run();
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double sum = 0.0;
    for (double v : p.row(r)) {
      CHECK(v > 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }
  CHECK(run() == p);
}

TEST_CASE("relative distribution closed forms") {
  auto same = relative_distribution(std::vector<double>{0.1, 0.2, 0.7},
                                    std::vector<double>{0.1, 0.2, 0.7});
  for (double v : same) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));

  auto r = relative_distribution(std::vector<double>{0.8, 0.2}, std::vector<double>{0.2, 0.8});
  const double hi = std::exp(0.6) / (std::exp(0.6) + std::exp(-0.6));
  CHECK(r[0] == doctest::Approx(hi).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(1.0 - hi).epsilon(1e-12));
  CHECK(r[0] == doctest::Approx(0.76852).epsilon(1e-5));
  CHECK(r[1] == doctest::Approx(0.23148).epsilon(1e-4));

  auto swapped =
      relative_distribution(std::vector<double>{0.2, 0.8}, std::vector<double>{0.8, 0.2});
  CHECK(swapped[0] == doctest::Approx(r[1]).epsilon(1e-12));
  CHECK(swapped[1] == doctest::Approx(r[0]).epsilon(1e-12));

  CHECK_THROWS_AS(
      relative_distribution(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0}),
      ConfigError);
  CHECK_THROWS_AS(relative_distribution(nn::Tensor2D(1, 2), nn::Tensor2D(1, 3)), ConfigError);
}

TEST_CASE("auxiliary loss closed forms") {
  for (std::size_t n : {64u, 4096u}) {
    std::vector<double> u(n, 1.0 / static_cast<double>(n));
    CHECK(explicit_loss(u, 17, 1) == doctest::Approx(std::log(static_cast<double>(n))).epsilon(1e-14));
    CHECK(implicit_loss(u, 17) == doctest::Approx(std::log(static_cast<double>(n))).epsilon(1e-14));
    CHECK(explicit_loss(u, 17, 0) == 0.0);
  }
  CHECK(std::log(4096.0) == doctest::Approx(8.3178).epsilon(1e-5));

  std::vector<double> half(4, 0.5 / 3);
  half[2] = 0.5;
  CHECK(explicit_loss(half, 2, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(explicit_loss(half, 6, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  std::vector<double> peaked(8, 1e-9 / 7);
  peaked[3] = 1.0 - 1e-9;
  CHECK(implicit_loss(peaked, 3) < 1e-8);
  CHECK(implicit_loss(peaked, 3) == implicit_loss(peaked, 11));
}

TEST_CASE("more mass at the target strictly lowers the explicit loss") {
  std::vector<double> p(16, 1.0 / 16);
  double previous = explicit_loss(p, 5, 1);
  for (int step = 0; step < 10; ++step) {
    const double moved = p[0] * 0.5;
    p[0] -= moved;
    p[5] += moved;
    const double now = explicit_loss(p, 5, 1);
    CHECK(now < previous);
    previous = now;
  }
}

TEST_CASE("batch auxiliary losses average over the batch") {
  auto batch = genli::testing::small_batch(3);
  nn::Tape t;
  nn::Tensor2D probs(3, 64, 1.0 / 64);
  nn::Var p = t.constant(probs);
  const std::size_t rows[] = {0, 0, 1, 2};
  int clicks = 0;
  for (const auto& s : batch) clicks += s.label;
  nn::Var e = explicit_loss(t, p, rows, batch);
  nn::Var i = implicit_loss(t, p, rows, batch);
  CHECK(t.value(e)[0] == doctest::Approx(clicks / 4.0 * std::log(64.0)).epsilon(1e-12));
  CHECK(t.value(i)[0] == doctest::Approx(std::log(64.0)).epsilon(1e-12));
}
