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

#include "genli/embedding.hpp"

#include <cmath>

#include "genli/errors.hpp"
#include "genli/nn/ops.hpp"

namespace genli {

EmbeddingTable::EmbeddingTable(std::string field, std::size_t vocab_size, std::size_t dim)
    : field_(std::move(field)), vocab_size_(vocab_size), dim_(dim) {
  if (vocab_size_ < 2) {
    throw ConfigError("embedding '" + field_ + "' needs a vocabulary beyond the padding row");
  }
  if (dim_ == 0) throw ConfigError("embedding '" + field_ + "' needs a positive dimension");
}

void EmbeddingTable::init(nn::ParameterStore& store, Rng& rng) const {
  const double limit = 1.0 / std::sqrt(static_cast<double>(dim_));
  nn::Tensor2D table(vocab_size_, dim_);
  for (double& v : table.values()) v = rng.uniform(-limit, limit);
  store.add(param_name(), std::move(table), {.freeze_row0 = true});
}

void EmbeddingTable::check(std::uint32_t x) const {
  if (x >= vocab_size_) {
    throw DataError("field '" + field_ + "': index " + std::to_string(x) +
                    " outside vocabulary of size " + std::to_string(vocab_size_));
  }
}

std::span<const double> EmbeddingTable::embed(const nn::ParameterStore& store,
                                              std::uint32_t x) const {
  check(x);
  return store.at(param_name()).value.row(x);
}

nn::Var EmbeddingTable::embed(nn::Tape& t, nn::ParameterStore& store,
                              std::span<const std::uint32_t> indices) const {
  std::vector<std::size_t> rows(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    check(indices[i]);
    rows[i] = indices[i];
  }
  return nn::select_rows(t, t.parameter(store, param_name()), std::move(rows));
}

void validate(const EmbeddingConfig& cfg) {
  if (cfg.item_dim == 0 || cfg.category_dim == 0) {
    throw ConfigError("embedding dimensions must be positive");
  }
  if (cfg.item_vocab_size < 2 || cfg.category_vocab_size < 2) {
    throw ConfigError("item and category vocabularies must be set");
  }
}

BehaviorEmbedder::BehaviorEmbedder(const EmbeddingConfig& cfg)
    : items_("item", cfg.item_vocab_size, cfg.item_dim),
      categories_("category", cfg.category_vocab_size, cfg.category_dim) {}

void BehaviorEmbedder::init(nn::ParameterStore& store, Rng& rng) const {
  items_.init(store, rng);
  categories_.init(store, rng);
}

std::vector<double> BehaviorEmbedder::embed_behavior(const nn::ParameterStore& store,
                                                     const data::Behavior& b) const {
  auto item = items_.embed(store, b.item);
  auto category = categories_.embed(store, b.category);
  std::vector<double> out(item.begin(), item.end());
  out.insert(out.end(), category.begin(), category.end());
  return out;
}

nn::Var BehaviorEmbedder::embed(nn::Tape& t, nn::ParameterStore& store,
                                std::span<const data::Behavior> behaviors) const {
  std::vector<std::uint32_t> item_ids(behaviors.size());
  std::vector<std::uint32_t> category_ids(behaviors.size());
  for (std::size_t i = 0; i < behaviors.size(); ++i) {
    item_ids[i] = behaviors[i].item;
    category_ids[i] = behaviors[i].category;
  }
  const nn::Var parts[] = {items_.embed(t, store, item_ids),
                           categories_.embed(t, store, category_ids)};
  return nn::concat_cols(t, parts);
}

}  // namespace genli
