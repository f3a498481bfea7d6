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

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "genli/brm.hpp"
#include "genli/data.hpp"
#include "genli/embedding.hpp"
#include "genli/ifm.hpp"
#include "genli/igm.hpp"
#include "genli/nn/layers.hpp"
#include "genli/nn/tape.hpp"

namespace genli {

struct ForwardResult {
  nn::Var logits;  // batch x 1
  nn::Var loss_ctr;
  nn::Var loss_implicit;  // invalid when the model has no such term
  nn::Var loss_explicit;
  nn::Var total;
};

// Anything the trainer can optimize: a CTR model whose forward pass records
// its losses on a tape.
class CtrModel {
 public:
  virtual ~CtrModel() = default;
  virtual std::string name() const = 0;
  virtual void init(nn::ParameterStore& store, std::uint64_t seed) const = 0;
  virtual ForwardResult forward(nn::Tape& t, nn::ParameterStore& store,
                                std::span<const data::Sample> batch) const = 0;
};

// Samples sharing a history pointer form one user group; interest
// generation and retrieval run once per group.
struct UserGroups {
  std::vector<const data::BehaviorSequence*> histories;
  std::vector<std::size_t> of_sample;
};

UserGroups group_by_history(std::span<const data::Sample> batch);

struct GenliConfig {
  EmbeddingConfig embedding;
  std::size_t heads = 4;
  std::size_t head_dim = 8;
  std::size_t distribution_size = 4096;  // N
  std::size_t window = 10;               // l
  std::size_t top_k = 20;                // k per kind, K = 3k
  std::vector<std::size_t> interest_hidden = {200, 80};
  std::vector<std::size_t> ctr_hidden = {200, 80};
  double alpha = 1.0;  // implicit loss weight
  double beta = 1.0;   // explicit loss weight
  // Ablations: a disabled kind is neither retrieved nor aggregated; its
  // block of z_F is zero. Interest heads and their losses stay in place.
  std::array<bool, kInterestKinds> use_kind = {true, true, true};
};

void validate(const GenliConfig& cfg);

struct GenliForward : ForwardResult {
  UserGroups users;
  nn::Var p_implicit;  // users x N
  nn::Var p_explicit;
  nn::Tensor2D p_relative;
  std::vector<RetrievalResult> retrieval;  // per user
  nn::Var x_l;
  nn::Var x_s;
  nn::Var gate;
};

struct GenliForwardOptions {
  // Reuse these selections instead of retrieving (one per user group);
  // finite-difference checks hold the discrete retrieval step fixed.
  const std::vector<RetrievalResult>* frozen_retrieval = nullptr;
};

class GenliModel : public CtrModel {
 public:
  explicit GenliModel(GenliConfig cfg);

  std::string name() const override { return "genli"; }
  void init(nn::ParameterStore& store, std::uint64_t seed) const override;
  ForwardResult forward(nn::Tape& t, nn::ParameterStore& store,
                        std::span<const data::Sample> batch) const override {
    return forward_detailed(t, store, batch);
  }
  GenliForward forward_detailed(nn::Tape& t, nn::ParameterStore& store,
                                std::span<const data::Sample> batch,
                                const GenliForwardOptions& options = {}) const;

  const GenliConfig& config() const { return cfg_; }
  const BehaviorEmbedder& embedder() const { return embedder_; }
  const InterestHead& implicit_head() const { return implicit_; }
  const InterestHead& explicit_head() const { return explicit_; }
  const nn::MultiHeadAttention& kind_attention(InterestKind k) const {
    return kind_mha_[static_cast<int>(k)];
  }
  const nn::MultiHeadAttention& short_attention() const { return short_mha_; }
  const InterestFusion& fusion() const { return fusion_; }
  const CtrHead& ctr_head() const { return ctr_; }

 private:
  GenliConfig cfg_;
  BehaviorEmbedder embedder_;
  InterestHead implicit_;
  InterestHead explicit_;
  std::vector<nn::MultiHeadAttention> kind_mha_;
  nn::MultiHeadAttention short_mha_;
  InterestFusion fusion_;
  CtrHead ctr_;
};

// Gathers the behaviors behind per-user selections into one key block:
// row u*k + j holds selection j of user u (padding where unfilled), rows
// ordered by position so the keys are in temporal order.
struct KeyBlock {
  std::vector<data::Behavior> behaviors;
  std::vector<std::uint8_t> valid;
};

KeyBlock gather_selected(const std::vector<const data::BehaviorSequence*>& histories,
                         const std::vector<const Selection*>& selections, std::size_t k);

// The shared target-attention aggregation: one query per sample against its
// user's key group.
nn::Var aggregate(nn::Tape& t, nn::ParameterStore& store, const nn::MultiHeadAttention& mha,
                  nn::Var queries, nn::Var keys, std::span<const std::size_t> group_of_query,
                  std::size_t groups, std::size_t per_group, std::vector<std::uint8_t> valid);

// Batch-mean cross-entropy of logits against labels.
nn::Var ctr_loss(nn::Tape& t, nn::Var logits, std::span<const data::Sample> batch);

}  // namespace genli
