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

#include "genli/baselines.hpp"

#include "genli/errors.hpp"
#include "genli/nn/ops.hpp"

namespace genli {

const char* to_string(ScoringMethod m) {
  switch (m) {
    case ScoringMethod::kAvgPool:
      return "avg_pool";
    case ScoringMethod::kSimHard:
      return "sim_hard";
    case ScoringMethod::kSimSoft:
      return "sim_soft";
    case ScoringMethod::kEtaSimhash:
      return "eta_simhash";
    case ScoringMethod::kSdimCollision:
      return "sdim_collision";
    case ScoringMethod::kTwinAttention:
      return "twin_attention";
    case ScoringMethod::kGenliLookup:
      return "genli_lookup";
  }
  return "unknown";
}

ScoringMethod parse_scoring_method(const std::string& name) {
  for (ScoringMethod m :
       {ScoringMethod::kAvgPool, ScoringMethod::kSimHard, ScoringMethod::kSimSoft,
        ScoringMethod::kEtaSimhash, ScoringMethod::kSdimCollision, ScoringMethod::kTwinAttention,
        ScoringMethod::kGenliLookup}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown scoring method '" + name + "'");
}

namespace {

nn::Tensor2D gaussian_planes(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  nn::Tensor2D planes(rows, dim);
  for (double& v : planes.values()) v = rng.normal();
  return planes;
}

}  // namespace

SimHash::SimHash(std::size_t dim, std::size_t bits, std::uint64_t seed)
    : dim_(dim), bits_(bits), planes_(gaussian_planes(bits, dim, seed)) {
  if (dim == 0 || bits == 0) throw ConfigError("simhash needs positive dim and bit count");
}

SdimHasher::SdimHasher(std::size_t dim, std::size_t rounds, std::size_t bits_per_round,
                       std::uint64_t seed)
    : dim_(dim),
      rounds_(rounds),
      bits_(bits_per_round),
      planes_(gaussian_planes(rounds * bits_per_round, dim, seed)) {
  if (rounds == 0) throw ConfigError("sdim needs at least one round");
  if (bits_per_round == 0 || bits_per_round > 32) {
    throw ConfigError("sdim bits per round must lie in [1, 32]");
  }
}

CollisionSelection sdim_collision_select(const SdimHasher& hasher,
                                         std::span<const std::uint32_t> behavior_buckets,
                                         std::span<const std::uint8_t> mask,
                                         std::span<const std::uint32_t> target_buckets) {
  const std::size_t r = hasher.rounds();
  CollisionSelection out;
  const std::size_t n = behavior_buckets.size() / r;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const std::size_t c = hasher.collisions(behavior_buckets.data() + i * r, target_buckets.data());
    if (c > 0) {
      out.positions.push_back(i);
      out.weights.push_back(c);
    }
  }
  return out;
}

double twin_attention_score(std::span<const double> e_b, std::span<const double> e_t,
                            const nn::Tensor2D& w_q, const nn::Tensor2D& w_k,
                            std::size_t head_dim) {
  double s = 0.0;
  for (std::size_t c = 0; c < w_q.cols(); ++c) {
    double q = 0.0, k = 0.0;
    for (std::size_t r = 0; r < w_q.rows(); ++r) {
      q += e_t[r] * w_q(r, c);
      k += e_b[r] * w_k(r, c);
    }
    s += q * k;
  }
  return s / std::sqrt(static_cast<double>(head_dim));
}

std::vector<double> avg_pool_feature(const nn::Tensor2D& embeddings,
                                     std::span<const std::uint8_t> mask) {
  std::vector<double> out(embeddings.cols(), 0.0);
  std::size_t n = 0;
  for (std::size_t r = 0; r < embeddings.rows(); ++r) {
    if (!mask.empty() && !mask[r]) continue;
    ++n;
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += embeddings(r, c);
  }
  if (n == 0) throw DataError("avg_pool_feature: no valid behaviors");
  for (double& v : out) v /= static_cast<double>(n);
  return out;
}

void validate(const BaselineConfig& cfg) {
  validate(cfg.embedding);
  nn::validate(nn::MhaConfig{cfg.heads, cfg.head_dim, cfg.embedding.behavior_dim()});
  if (cfg.window == 0) throw ConfigError("window l must be >= 1");
  if (cfg.top_k == 0) throw ConfigError("top_k must be >= 1");
  switch (cfg.method) {
    case ScoringMethod::kAvgPool:
    case ScoringMethod::kSimHard:
    case ScoringMethod::kSimSoft:
    case ScoringMethod::kEtaSimhash:
    case ScoringMethod::kTwinAttention:
      return;
    default:
      throw ConfigError(std::string("no baseline model for method ") + to_string(cfg.method));
  }
}

namespace {

const BaselineConfig& checked(const BaselineConfig& cfg) {
  validate(cfg);
  return cfg;
}

}  // namespace

BaselineModel::BaselineModel(BaselineConfig cfg)
    : cfg_(checked(cfg)),
      embedder_(cfg_.embedding),
      esu_("baseline.esu", {cfg_.heads, cfg_.head_dim, cfg_.embedding.behavior_dim()}),
      short_mha_("ifm.short", {cfg_.heads, cfg_.head_dim, cfg_.embedding.behavior_dim()}),
      ctr_("ctr", 2 * cfg_.head_dim + cfg_.embedding.behavior_dim(), cfg_.ctr_hidden),
      simhash_(cfg_.embedding.behavior_dim(), cfg_.hash_bits, cfg_.hash_seed) {}

void BaselineModel::init(nn::ParameterStore& store, std::uint64_t seed) const {
  Rng rng(seed);
  embedder_.init(store, rng);
  if (cfg_.method == ScoringMethod::kAvgPool) {
    store.add("baseline.pool.w",
              nn::glorot_uniform(cfg_.embedding.behavior_dim(), cfg_.head_dim, rng));
  } else {
    esu_.init(store, rng);
  }
  short_mha_.init(store, rng);
  ctr_.init(store, rng);
}

Selection BaselineModel::retrieve(const nn::ParameterStore& store,
                                  const data::BehaviorSequence& seq,
                                  const data::Behavior& target) const {
  const std::size_t k = cfg_.top_k;
  switch (cfg_.method) {
    case ScoringMethod::kSimHard:
      return select_topk(seq.length(), seq.mask, k, [&](std::size_t i) {
        return score_category_match(seq.slots[i], target);
      });
    case ScoringMethod::kSimSoft: {
      const auto e_t = embedder_.embed_behavior(store, target);
      return select_topk(seq.length(), seq.mask, k, [&](std::size_t i) {
        const auto e_b = embedder_.embed_behavior(store, seq.slots[i]);
        return score_inner_product<double>(e_b, e_t);
      });
    }
    case ScoringMethod::kEtaSimhash: {
      const auto sig_t = simhash_.fingerprint(embedder_.embed_behavior(store, target));
      return select_topk(seq.length(), seq.mask, k, [&](std::size_t i) {
        const auto sig_b = simhash_.fingerprint(embedder_.embed_behavior(store, seq.slots[i]));
        return simhash_.score(sig_b.data(), sig_t.data());
      });
    }
    case ScoringMethod::kTwinAttention: {
      const auto e_t = embedder_.embed_behavior(store, target);
      const auto& w_q = store.at(esu_.w_q()).value;
      const auto& w_k = store.at(esu_.w_k()).value;
      return select_topk(seq.length(), seq.mask, k, [&](std::size_t i) {
        const auto e_b = embedder_.embed_behavior(store, seq.slots[i]);
        return twin_attention_score(e_b, e_t, w_q, w_k, cfg_.head_dim);
      });
    }
    default:
      throw ConfigError(std::string("retrieve: method ") + to_string(cfg_.method) +
                        " has no per-sample retrieval");
  }
}

ForwardResult BaselineModel::forward(nn::Tape& t, nn::ParameterStore& store,
                                     std::span<const data::Sample> batch) const {
  if (batch.empty()) throw DataError("forward: empty batch");
  UserGroups users = group_by_history(batch);
  const std::size_t l = cfg_.window;

  std::vector<data::Behavior> window;
  std::vector<std::uint8_t> window_valid;
  for (const data::BehaviorSequence* h : users.histories) {
    ShortTermWindow w = short_term_window(*h, l);
    if (w.valid_count() == 0) throw DataError("forward: user has no behaviors");
    window.insert(window.end(), w.behaviors.begin(), w.behaviors.end());
    window_valid.insert(window_valid.end(), w.mask.begin(), w.mask.end());
  }
  nn::Var window_emb = embedder_.embed(t, store, window);

  std::vector<data::Behavior> targets(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) targets[i] = batch[i].target;
  nn::Var e_t = embedder_.embed(t, store, targets);

  nn::Var x_l;
  if (cfg_.method == ScoringMethod::kAvgPool) {
    std::vector<data::Behavior> all;
    nn::RowGroups groups;
    for (const data::BehaviorSequence* h : users.histories) {
      groups.begin.push_back(all.size());
      groups.count.push_back(h->length());
      all.insert(all.end(), h->slots.begin(), h->slots.end());
      groups.valid.insert(groups.valid.end(), h->mask.begin(), h->mask.end());
    }
    nn::Var pooled = nn::group_mean(t, embedder_.embed(t, store, all), std::move(groups));
    nn::Var per_sample = nn::select_rows(t, pooled, users.of_sample);
    x_l = nn::matmul(t, per_sample, t.parameter(store, "baseline.pool.w"));
  } else {
    const std::size_t k = cfg_.top_k;
    std::vector<const data::BehaviorSequence*> histories(batch.size());
    std::vector<Selection> selections(batch.size());
    std::vector<const Selection*> sel(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      histories[i] = batch[i].history.get();
      selections[i] = retrieve(store, *histories[i], batch[i].target);
      sel[i] = &selections[i];
    }
    KeyBlock block = gather_selected(histories, sel, k);
    nn::Var keys = embedder_.embed(t, store, block.behaviors);
    std::vector<std::size_t> own(batch.size());
    for (std::size_t i = 0; i < own.size(); ++i) own[i] = i;
    x_l = aggregate(t, store, esu_, e_t, keys, own, batch.size(), k, std::move(block.valid));
  }
  nn::Var x_s =
      aggregate(t, store, short_mha_, e_t, window_emb, users.of_sample, users.histories.size(), l,
                window_valid);

  ForwardResult out;
  const nn::Var parts[] = {x_l, x_s, e_t};
  out.logits = ctr_.logits(t, store, parts);
  out.loss_ctr = ctr_loss(t, out.logits, batch);
  out.total = out.loss_ctr;
  return out;
}

}  // namespace genli
