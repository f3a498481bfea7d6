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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genli/data.hpp"
#include "genli/nn/tape.hpp"
#include "genli/random.hpp"

namespace genli {

// One categorical field. Row 0 is the padding/unknown row: zero and frozen.
class EmbeddingTable {
 public:
  EmbeddingTable(std::string field, std::size_t vocab_size, std::size_t dim);

  // Uniform in [-1/sqrt(dim), 1/sqrt(dim)], row 0 zeroed.
  void init(nn::ParameterStore& store, Rng& rng) const;

  // Row x of the table. DataError naming the field when x is out of range.
  std::span<const double> embed(const nn::ParameterStore& store, std::uint32_t x) const;
  // Gathers one row per index; gradients scatter back into the touched rows.
  nn::Var embed(nn::Tape& t, nn::ParameterStore& store,
                std::span<const std::uint32_t> indices) const;

  const std::string& field() const { return field_; }
  std::string param_name() const { return "embedding." + field_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t dim() const { return dim_; }

 private:
  void check(std::uint32_t x) const;

  std::string field_;
  std::size_t vocab_size_;
  std::size_t dim_;
};

struct EmbeddingConfig {
  std::size_t item_vocab_size = 0;
  std::size_t category_vocab_size = 0;
  std::size_t item_dim = 4;
  std::size_t category_dim = 4;

  std::size_t behavior_dim() const { return item_dim + category_dim; }
};

void validate(const EmbeddingConfig& cfg);

// Behavior vector = [item embedding, category embedding].
class BehaviorEmbedder {
 public:
  explicit BehaviorEmbedder(const EmbeddingConfig& cfg);

  void init(nn::ParameterStore& store, Rng& rng) const;

  std::vector<double> embed_behavior(const nn::ParameterStore& store,
                                     const data::Behavior& b) const;
  // One row per behavior, width behavior_dim().
  nn::Var embed(nn::Tape& t, nn::ParameterStore& store,
                std::span<const data::Behavior> behaviors) const;

  const EmbeddingTable& items() const { return items_; }
  const EmbeddingTable& categories() const { return categories_; }
  std::size_t dim() const { return items_.dim() + categories_.dim(); }

 private:
  EmbeddingTable items_;
  EmbeddingTable categories_;
};

}  // namespace genli
