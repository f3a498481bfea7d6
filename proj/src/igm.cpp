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

#include "genli/igm.hpp"

#include <algorithm>
#include <cmath>

#include "genli/brm.hpp"
#include "genli/errors.hpp"
#include "genli/nn/ops.hpp"

namespace genli {

std::size_t ShortTermWindow::valid_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

ShortTermWindow short_term_window(const data::BehaviorSequence& seq, std::size_t l) {
  if (l == 0) throw ConfigError("short-term window length must be positive");
  ShortTermWindow w;
  w.behaviors.reserve(l);
  for (std::size_t i = 0; i < seq.length() && w.behaviors.size() < l; ++i) {
    if (seq.mask[i]) w.behaviors.push_back(seq.slots[i]);
  }
  w.mask.assign(l, 0);
  std::fill(w.mask.begin(), w.mask.begin() + static_cast<std::ptrdiff_t>(w.behaviors.size()), 1);
  w.behaviors.resize(l);
  return w;
}

void validate(const InterestHeadConfig& cfg) {
  nn::validate(nn::MhaConfig{cfg.heads, cfg.head_dim, cfg.behavior_dim});
  if (cfg.distribution_size < 2) throw ConfigError("distribution size N must be >= 2");
}

namespace {

std::vector<std::size_t> mlp_dims(const InterestHeadConfig& cfg) {
  std::vector<std::size_t> dims{cfg.head_dim};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(cfg.distribution_size);
  return dims;
}

}  // namespace

InterestHead::InterestHead(std::string name, InterestHeadConfig cfg)
    : name_(std::move(name)),
      cfg_(std::move(cfg)),
      mha_(name_ + ".mha", nn::MhaConfig{cfg_.heads, cfg_.head_dim, cfg_.behavior_dim}),
      mlp_(name_ + ".mlp", mlp_dims(cfg_), nn::Activation::kPrelu, nn::Activation::kNone) {
  validate(cfg_);
}

void InterestHead::init(nn::ParameterStore& store, Rng& rng) const {
  const double limit = 1.0 / std::sqrt(static_cast<double>(cfg_.behavior_dim));
  nn::Tensor2D query(1, cfg_.behavior_dim);
  for (double& v : query.values()) v = rng.uniform(-limit, limit);
  store.add(query_name(), std::move(query));
  mha_.init(store, rng);
  store.add(projection_name(), nn::glorot_uniform(2 * cfg_.head_dim, cfg_.head_dim, rng));
  mlp_.init(store, rng);
}

nn::Var InterestHead::hidden_interest(nn::Tape& t, nn::ParameterStore& store, nn::Var window,
                                      std::size_t users, std::size_t l,
                                      std::vector<std::uint8_t> valid) const {
  const std::size_t d = cfg_.behavior_dim;
  if (t.value(window).rows() != users * l || t.value(window).cols() != d) {
    throw ConfigError("hidden_interest: window is " + t.value(window).shape_string() +
                      ", expected " + std::to_string(users * l) + "x" + std::to_string(d));
  }
  for (std::size_t u = 0; u < users; ++u) {
    if (!valid[u * l]) {
      throw DataError("hidden_interest: user " + std::to_string(u) + " has no behaviors");
    }
  }
  std::vector<std::size_t> newest(users);
  for (std::size_t u = 0; u < users; ++u) newest[u] = u * l;
  nn::Var e1 = nn::select_rows(t, window, std::move(newest));
  nn::Var eq = nn::tile_rows(t, t.parameter(store, query_name()), users);
  const nn::Var parts[] = {e1, eq};
  // Row 2u is e_1 of user u, row 2u+1 is e_q.
  nn::Var queries = nn::reshape(t, nn::concat_cols(t, parts), 2 * users, d);
  nn::Var out = mha_.forward(t, store, queries, window, window,
                             nn::uniform_layout(users, 2, l, std::move(valid)));
  nn::Var pair = nn::reshape(t, out, users, 2 * cfg_.head_dim);
  return nn::matmul(t, pair, t.parameter(store, projection_name()));
}

nn::Var InterestHead::generate_distribution(nn::Tape& t, nn::ParameterStore& store,
                                            nn::Var h) const {
  return nn::softmax_rows(t, mlp_.forward(t, store, h));
}

nn::Tensor2D relative_distribution(const nn::Tensor2D& p_explicit,
                                   const nn::Tensor2D& p_implicit) {
  if (!p_explicit.same_shape(p_implicit)) {
    throw ConfigError("relative_distribution: " + p_explicit.shape_string() + " vs " +
                      p_implicit.shape_string());
  }
  nn::Tensor2D out(p_explicit.rows(), p_explicit.cols());
  out.matrix() = p_explicit.matrix() - p_implicit.matrix();
  for (std::size_t r = 0; r < out.rows(); ++r) nn::softmax_inplace(out.row(r));
  return out;
}

std::vector<double> relative_distribution(std::span<const double> p_explicit,
                                          std::span<const double> p_implicit) {
  if (p_explicit.size() != p_implicit.size()) {
    throw ConfigError("relative_distribution: N mismatch (" + std::to_string(p_explicit.size()) +
                      " vs " + std::to_string(p_implicit.size()) + ")");
  }
  std::vector<double> out(p_explicit.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = p_explicit[i] - p_implicit[i];
  nn::softmax_inplace(out);
  return out;
}

double explicit_loss(std::span<const double> p_explicit, std::uint32_t target_item, int label) {
  if (label != 1) return 0.0;
  return -std::log(std::max(lookup_score(target_item, p_explicit), kLogFloor));
}

double implicit_loss(std::span<const double> p_implicit, std::uint32_t exposed_item) {
  return -std::log(std::max(lookup_score(exposed_item, p_implicit), kLogFloor));
}

nn::Var explicit_loss(nn::Tape& t, nn::Var p_explicit, std::span<const std::size_t> row_of_sample,
                      std::span<const data::Sample> samples) {
  const std::size_t n = t.value(p_explicit).cols();
  const double inv_batch = 1.0 / static_cast<double>(samples.size());
  std::vector<nn::Pick> picks;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].label != 1) continue;
    picks.push_back({row_of_sample[i], lookup_slot(samples[i].target.item, n), inv_batch});
  }
  return nn::weighted_neg_log(t, p_explicit, std::move(picks), kLogFloor);
}

nn::Var implicit_loss(nn::Tape& t, nn::Var p_implicit, std::span<const std::size_t> row_of_sample,
                      std::span<const data::Sample> samples) {
  const std::size_t n = t.value(p_implicit).cols();
  const double inv_batch = 1.0 / static_cast<double>(samples.size());
  std::vector<nn::Pick> picks;
  picks.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    picks.push_back(
        {row_of_sample[i], lookup_slot(data::exposed_or_surrogate(samples[i]), n), inv_batch});
  }
  return nn::weighted_neg_log(t, p_implicit, std::move(picks), kLogFloor);
}

}  // namespace genli
