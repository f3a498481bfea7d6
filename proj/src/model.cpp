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

#include "genli/model.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "genli/errors.hpp"
#include "genli/nn/ops.hpp"

namespace genli {

UserGroups group_by_history(std::span<const data::Sample> batch) {
  UserGroups g;
  g.of_sample.reserve(batch.size());
  std::unordered_map<const data::BehaviorSequence*, std::size_t> index;
  for (const data::Sample& s : batch) {
    if (!s.history) {
      throw DataError("sample of user " + std::to_string(s.user_id) + " has no history");
    }
    auto [it, inserted] = index.try_emplace(s.history.get(), g.histories.size());
    if (inserted) g.histories.push_back(s.history.get());
    g.of_sample.push_back(it->second);
  }
  return g;
}

void validate(const GenliConfig& cfg) {
  validate(cfg.embedding);
  nn::validate(nn::MhaConfig{cfg.heads, cfg.head_dim, cfg.embedding.behavior_dim()});
  if (cfg.distribution_size < 2) throw ConfigError("N must be >= 2");
  if (cfg.window == 0) throw ConfigError("window l must be >= 1");
  if (cfg.top_k == 0) throw ConfigError("k must be >= 1");
  if (!(cfg.alpha >= 0.0) || !(cfg.beta >= 0.0)) {
    throw ConfigError("loss weights alpha and beta must be >= 0");
  }
}

namespace {

InterestHeadConfig head_config(const GenliConfig& cfg) {
  validate(cfg);
  return {cfg.embedding.behavior_dim(), cfg.heads, cfg.head_dim, cfg.distribution_size,
          cfg.interest_hidden};
}

nn::MhaConfig mha_config(const GenliConfig& cfg) {
  return {cfg.heads, cfg.head_dim, cfg.embedding.behavior_dim()};
}

}  // namespace

GenliModel::GenliModel(GenliConfig cfg)
    : cfg_(std::move(cfg)),
      embedder_(cfg_.embedding),
      implicit_("igm.implicit", head_config(cfg_)),
      explicit_("igm.explicit", head_config(cfg_)),
      short_mha_("ifm.short", mha_config(cfg_)),
      fusion_("ifm.fusion", cfg_.head_dim),
      ctr_("ctr", 2 * cfg_.head_dim + cfg_.embedding.behavior_dim(), cfg_.ctr_hidden) {
  for (std::size_t k = 0; k < kInterestKinds; ++k) {
    kind_mha_.emplace_back(std::string("ifm.") + to_string(static_cast<InterestKind>(k)),
                           mha_config(cfg_));
  }
}

void GenliModel::init(nn::ParameterStore& store, std::uint64_t seed) const {
  Rng rng(seed);
  embedder_.init(store, rng);
  implicit_.init(store, rng);
  explicit_.init(store, rng);
  for (std::size_t k = 0; k < kInterestKinds; ++k) {
    if (cfg_.use_kind[k]) kind_mha_[k].init(store, rng);
  }
  short_mha_.init(store, rng);
  fusion_.init(store, rng);
  ctr_.init(store, rng);
}

KeyBlock gather_selected(const std::vector<const data::BehaviorSequence*>& histories,
                         const std::vector<const Selection*>& selections, std::size_t k) {
  KeyBlock block;
  block.behaviors.resize(histories.size() * k);
  block.valid.assign(histories.size() * k, 0);
  std::vector<std::size_t> positions;
  for (std::size_t u = 0; u < histories.size(); ++u) {
    positions.clear();
    for (std::size_t p : selections[u]->positions) {
      if (p != kPaddingPosition) positions.push_back(p);
    }
    std::sort(positions.begin(), positions.end());
    for (std::size_t j = 0; j < positions.size() && j < k; ++j) {
      block.behaviors[u * k + j] = histories[u]->slots[positions[j]];
      block.valid[u * k + j] = 1;
    }
  }
  return block;
}

nn::Var aggregate(nn::Tape& t, nn::ParameterStore& store, const nn::MultiHeadAttention& mha,
                  nn::Var queries, nn::Var keys, std::span<const std::size_t> group_of_query,
                  std::size_t groups, std::size_t per_group, std::vector<std::uint8_t> valid) {
  nn::AttentionLayout layout = nn::uniform_layout(groups, 0, per_group, std::move(valid));
  layout.query_group.assign(group_of_query.begin(), group_of_query.end());
  return mha.forward(t, store, queries, keys, keys, std::move(layout));
}

nn::Var ctr_loss(nn::Tape& t, nn::Var logits, std::span<const data::Sample> batch) {
  std::vector<double> labels(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) labels[i] = batch[i].label;
  return nn::bce_with_logits(t, logits, std::move(labels));
}

GenliForward GenliModel::forward_detailed(nn::Tape& t, nn::ParameterStore& store,
                                          std::span<const data::Sample> batch,
                                          const GenliForwardOptions& options) const {
  if (batch.empty()) throw DataError("forward: empty batch");
  GenliForward out;
  out.users = group_by_history(batch);
  const auto& histories = out.users.histories;
  const std::size_t users = histories.size();
  const std::size_t l = cfg_.window;
  const std::size_t k = cfg_.top_k;

  // Interest generation from the short-term window.
  std::vector<data::Behavior> window;
  std::vector<std::uint8_t> window_valid;
  window.reserve(users * l);
  window_valid.reserve(users * l);
  for (const data::BehaviorSequence* h : histories) {
    ShortTermWindow w = short_term_window(*h, l);
    window.insert(window.end(), w.behaviors.begin(), w.behaviors.end());
    window_valid.insert(window_valid.end(), w.mask.begin(), w.mask.end());
  }
  nn::Var window_emb = embedder_.embed(t, store, window);
  nn::Var h_implicit = implicit_.hidden_interest(t, store, window_emb, users, l, window_valid);
  nn::Var h_explicit = explicit_.hidden_interest(t, store, window_emb, users, l, window_valid);
  out.p_implicit = implicit_.generate_distribution(t, store, h_implicit);
  out.p_explicit = explicit_.generate_distribution(t, store, h_explicit);
  out.p_relative = relative_distribution(t.value(out.p_explicit), t.value(out.p_implicit));

  // Retrieval is a discrete, non-differentiable step.
  if (options.frozen_retrieval) {
    if (options.frozen_retrieval->size() != users) {
      throw ConfigError("frozen retrieval does not match the batch's user groups");
    }
    out.retrieval = *options.frozen_retrieval;
  } else {
    out.retrieval.reserve(users);
    const nn::Tensor2D& pi = t.value(out.p_implicit);
    const nn::Tensor2D& pe = t.value(out.p_explicit);
    for (std::size_t u = 0; u < users; ++u) {
      out.retrieval.push_back(
          retrieve_all(*histories[u], pi.row(u), pe.row(u), out.p_relative.row(u), k));
    }
  }

  std::vector<data::Behavior> targets(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) targets[i] = batch[i].target;
  nn::Var e_t = embedder_.embed(t, store, targets);

  std::vector<nn::Var> z(kInterestKinds);
  for (std::size_t kind = 0; kind < kInterestKinds; ++kind) {
    if (!cfg_.use_kind[kind]) {
      z[kind] = t.constant(nn::Tensor2D(batch.size(), cfg_.head_dim), "ablated");
      continue;
    }
    std::vector<const Selection*> sel(users);
    for (std::size_t u = 0; u < users; ++u) {
      sel[u] = &out.retrieval[u][static_cast<InterestKind>(kind)];
    }
    KeyBlock block = gather_selected(histories, sel, k);
    nn::Var keys = embedder_.embed(t, store, block.behaviors);
    z[kind] = aggregate(t, store, kind_mha_[kind], e_t, keys, out.users.of_sample, users, k,
                        std::move(block.valid));
  }
  out.x_s = aggregate(t, store, short_mha_, e_t, window_emb, out.users.of_sample, users, l,
                      window_valid);
  InterestFusion::Output fused = fusion_.fuse(t, store, z);
  out.x_l = fused.x_l;
  out.gate = fused.gate;

  const nn::Var parts[] = {out.x_l, out.x_s, e_t};
  out.logits = ctr_.logits(t, store, parts);
  out.loss_ctr = ctr_loss(t, out.logits, batch);
  out.loss_implicit = implicit_loss(t, out.p_implicit, out.users.of_sample, batch);
  out.loss_explicit = explicit_loss(t, out.p_explicit, out.users.of_sample, batch);
  const std::pair<nn::Var, double> terms[] = {
      {out.loss_ctr, 1.0}, {out.loss_implicit, cfg_.alpha}, {out.loss_explicit, cfg_.beta}};
  out.total = nn::weighted_sum(t, terms);
  return out;
}

}  // namespace genli
