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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "genli/data.hpp"
#include "genli/nn/layers.hpp"
#include "genli/nn/tape.hpp"

namespace genli {

// The first (newest) l valid slots of a newest-first sequence.
struct ShortTermWindow {
  std::vector<data::Behavior> behaviors;  // exactly l entries, padding at the tail
  std::vector<std::uint8_t> mask;

  std::size_t length() const { return behaviors.size(); }
  std::size_t valid_count() const;
};

ShortTermWindow short_term_window(const data::BehaviorSequence& seq, std::size_t l);

struct InterestHeadConfig {
  std::size_t behavior_dim = 8;
  std::size_t heads = 4;
  std::size_t head_dim = 8;
  std::size_t distribution_size = 4096;  // N
  std::vector<std::size_t> hidden = {200, 80};
};

void validate(const InterestHeadConfig& cfg);

// Learnable query e_q, an MHA over the window with queries [e_1; e_q], the
// projection of the two concatenated output rows (2*d_h -> d_h) and the
// distribution MLP d_h -> hidden... -> N.
class InterestHead {
 public:
  InterestHead(std::string name, InterestHeadConfig cfg);

  void init(nn::ParameterStore& store, Rng& rng) const;

  // window: (users*l) x d embeddings grouped per user, newest first, with
  // one validity flag per row. Returns users x d_h. DataError when a user
  // has no valid behavior.
  nn::Var hidden_interest(nn::Tape& t, nn::ParameterStore& store, nn::Var window,
                          std::size_t users, std::size_t l,
                          std::vector<std::uint8_t> valid) const;
  // softmax(MLP(h)), users x N.
  nn::Var generate_distribution(nn::Tape& t, nn::ParameterStore& store, nn::Var h) const;

  const std::string& name() const { return name_; }
  const InterestHeadConfig& config() const { return cfg_; }
  const nn::MultiHeadAttention& attention() const { return mha_; }
  const nn::Mlp& mlp() const { return mlp_; }
  std::string query_name() const { return name_ + ".e_q"; }
  std::string projection_name() const { return name_ + ".w_h"; }

 private:
  std::string name_;
  InterestHeadConfig cfg_;
  nn::MultiHeadAttention mha_;
  nn::Mlp mlp_;
};

// softmax(pE - pI), row by row. The difference is taken between
// probabilities, not logits. ConfigError on a shape mismatch.
nn::Tensor2D relative_distribution(const nn::Tensor2D& p_explicit, const nn::Tensor2D& p_implicit);
std::vector<double> relative_distribution(std::span<const double> p_explicit,
                                          std::span<const double> p_implicit);

inline constexpr double kLogFloor = 1e-12;

// Single-sample forms: -log s(target, pE) when clicked, else 0; and
// -log s(exposed, pI).
double explicit_loss(std::span<const double> p_explicit, std::uint32_t target_item, int label);
double implicit_loss(std::span<const double> p_implicit, std::uint32_t exposed_item);

// Batch forms on the tape. row_of_sample maps each sample to its row of the
// distribution matrix; both losses are averaged over the batch.
nn::Var explicit_loss(nn::Tape& t, nn::Var p_explicit, std::span<const std::size_t> row_of_sample,
                      std::span<const data::Sample> samples);
nn::Var implicit_loss(nn::Tape& t, nn::Var p_implicit, std::span<const std::size_t> row_of_sample,
                      std::span<const data::Sample> samples);

}  // namespace genli
