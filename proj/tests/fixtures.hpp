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

// Small random inputs shared by the model-level suites.
#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "genli/data.hpp"
#include "genli/model.hpp"
#include "genli/nn/tensor.hpp"
#include "genli/random.hpp"

namespace genli::testing {

// A history of `valid` random behaviors padded to `length`; categories
// follow the item block layout item -> (item - 1) % categories + 1.
inline std::shared_ptr<const data::BehaviorSequence> random_history(Rng& rng, std::size_t length,
                                                                    std::size_t valid,
                                                                    std::size_t items,
                                                                    std::size_t categories) {
  std::vector<data::Behavior> bs;
  for (std::size_t i = 0; i < valid; ++i) {
    const auto item = static_cast<std::uint32_t>(1 + rng.below(items - 1));
    bs.push_back({item, static_cast<std::uint32_t>((item - 1) % (categories - 1) + 1),
                  static_cast<std::int64_t>(1000 + 10 * i)});
  }
  return std::make_shared<const data::BehaviorSequence>(data::make_sequence(bs, length));
}

inline data::Sample random_sample(Rng& rng, std::shared_ptr<const data::BehaviorSequence> history,
                                  std::size_t items, std::size_t categories,
                                  std::uint64_t user) {
  data::Sample s;
  s.user_id = user;
  s.history = std::move(history);
  const auto item = static_cast<std::uint32_t>(1 + rng.below(items - 1));
  s.target = {item, static_cast<std::uint32_t>((item - 1) % (categories - 1) + 1), 99999};
  s.label = rng.bernoulli(0.5) ? 1 : 0;
  return s;
}

// The small configuration used by gradient checks: L=16, N=64, k=2, l=4, d=8.
inline GenliConfig small_config(std::size_t items = 40, std::size_t categories = 8) {
  GenliConfig cfg;
  cfg.embedding.item_vocab_size = items;
  cfg.embedding.category_vocab_size = categories;
  cfg.distribution_size = 64;
  cfg.top_k = 2;
  cfg.window = 4;
  return cfg;
}

// Four samples over three users (two samples share a history).
inline std::vector<data::Sample> small_batch(std::uint64_t seed, std::size_t items = 40,
                                             std::size_t categories = 8) {
  Rng rng(seed);
  std::vector<data::Sample> batch;
  auto h1 = random_history(rng, 16, 16, items, categories);
  auto h2 = random_history(rng, 16, 9, items, categories);
  auto h3 = random_history(rng, 16, 3, items, categories);
  batch.push_back(random_sample(rng, h1, items, categories, 1));
  batch.push_back(random_sample(rng, h1, items, categories, 1));
  batch.push_back(random_sample(rng, h2, items, categories, 2));
  batch.push_back(random_sample(rng, h3, items, categories, 3));
  batch[0].label = 1;
  batch[1].label = 0;
  batch[3].exposed_item = 7;
  return batch;
}

inline nn::Tensor2D identity(std::size_t n) {
  nn::Tensor2D m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

inline void set_identity_mha(nn::ParameterStore& store, const nn::MultiHeadAttention& mha) {
  const std::size_t n = mha.config().input_dim;
  store.at(mha.w_q()).value = identity(n);
  store.at(mha.w_k()).value = identity(n);
  store.at(mha.w_v()).value = identity(n);
  store.at(mha.w_o()).value = identity(n);
}

// Per-head loop reference of multi-head attention for a single query row
// over a set of key rows (all valid).
inline std::vector<double> loop_mha(const std::vector<double>& q,
                                    const std::vector<std::vector<double>>& keys,
                                    const nn::ParameterStore& store,
                                    const nn::MultiHeadAttention& mha) {
  const auto& cfg = mha.config();
  const nn::Tensor2D& wq = store.at(mha.w_q()).value;
  const nn::Tensor2D& wk = store.at(mha.w_k()).value;
  const nn::Tensor2D& wv = store.at(mha.w_v()).value;
  const nn::Tensor2D& wo = store.at(mha.w_o()).value;
  const std::size_t width = cfg.heads * cfg.head_dim;
  auto project = [&](const std::vector<double>& x, const nn::Tensor2D& w) {
    std::vector<double> out(width, 0.0);
    for (std::size_t c = 0; c < width; ++c) {
      for (std::size_t r = 0; r < x.size(); ++r) out[c] += x[r] * w(r, c);
    }
    return out;
  };
  const auto qp = project(q, wq);
  std::vector<std::vector<double>> kp, vp;
  for (const auto& k : keys) {
    kp.push_back(project(k, wk));
    vp.push_back(project(k, wv));
  }
  std::vector<double> concat(width, 0.0);
  for (std::size_t h = 0; h < cfg.heads; ++h) {
    std::vector<double> logits(keys.size());
    double m = -1e300;
    for (std::size_t j = 0; j < keys.size(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < cfg.head_dim; ++c) {
        s += qp[h * cfg.head_dim + c] * kp[j][h * cfg.head_dim + c];
      }
      logits[j] = s / std::sqrt(static_cast<double>(cfg.head_dim));
      m = std::max(m, logits[j]);
    }
    double z = 0.0;
    for (double& x : logits) z += (x = std::exp(x - m));
    for (std::size_t j = 0; j < keys.size(); ++j) {
      for (std::size_t c = 0; c < cfg.head_dim; ++c) {
        concat[h * cfg.head_dim + c] += logits[j] / z * vp[j][h * cfg.head_dim + c];
      }
    }
  }
  std::vector<double> out(cfg.head_dim, 0.0);
  for (std::size_t c = 0; c < cfg.head_dim; ++c) {
    for (std::size_t r = 0; r < width; ++r) out[c] += concat[r] * wo(r, c);
  }
  return out;
}

}  // namespace genli::testing
