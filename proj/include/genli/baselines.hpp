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

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genli/brm.hpp"
#include "genli/model.hpp"
#include "genli/nn/tensor.hpp"
#include "genli/random.hpp"

namespace genli {

enum class ScoringMethod {
  kAvgPool,
  kSimHard,
  kSimSoft,
  kEtaSimhash,
  kSdimCollision,
  kTwinAttention,
  kGenliLookup,
};

const char* to_string(ScoringMethod m);
ScoringMethod parse_scoring_method(const std::string& name);

// SIM-soft: O(d_h) dot product.
template <typename T>
T score_inner_product(std::span<const T> b, std::span<const T> t) {
  T s = 0;
  for (std::size_t i = 0; i < b.size(); ++i) s += b[i] * t[i];
  return s;
}

// SIM-hard: 1 when the categories agree.
inline double score_category_match(const data::Behavior& b, const data::Behavior& t) {
  return b.category == t.category ? 1.0 : 0.0;
}

// m random hyperplanes; bit i of a signature is sign(e . plane_i).
class SimHash {
 public:
  SimHash(std::size_t dim, std::size_t bits, std::uint64_t seed);

  std::size_t bits() const { return bits_; }
  std::size_t words() const { return (bits_ + 63) / 64; }
  // Writes words() packed words.
  template <typename T>
  void fingerprint(std::span<const T> e, std::uint64_t* out) const {
    for (std::size_t w = 0; w < words(); ++w) out[w] = 0;
    for (std::size_t i = 0; i < bits_; ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim_; ++c) s += planes_(i, c) * static_cast<double>(e[c]);
      if (s >= 0.0) out[i / 64] |= std::uint64_t{1} << (i % 64);
    }
  }
  std::vector<std::uint64_t> fingerprint(std::span<const double> e) const {
    std::vector<std::uint64_t> out(words());
    fingerprint(e, out.data());
    return out;
  }

  static std::size_t hamming(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
    std::size_t d = 0;
    for (std::size_t w = 0; w < words; ++w) d += std::popcount(a[w] ^ b[w]);
    return d;
  }
  // ETA score: m - hamming distance.
  double score(const std::uint64_t* sig_b, const std::uint64_t* sig_t) const {
    return static_cast<double>(bits_ - hamming(sig_b, sig_t, words()));
  }

 private:
  std::size_t dim_;
  std::size_t bits_;
  nn::Tensor2D planes_;
};

// SDIM-style bucketing: `rounds` independent rounds of `bits_per_round`
// hyperplanes; a behavior's bucket in a round is its sign pattern.
class SdimHasher {
 public:
  SdimHasher(std::size_t dim, std::size_t rounds, std::size_t bits_per_round,
             std::uint64_t seed);

  std::size_t rounds() const { return rounds_; }
  template <typename T>
  void buckets(std::span<const T> e, std::uint32_t* out) const {
    for (std::size_t r = 0; r < rounds_; ++r) {
      std::uint32_t b = 0;
      for (std::size_t i = 0; i < bits_; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < dim_; ++c) {
          s += planes_(r * bits_ + i, c) * static_cast<double>(e[c]);
        }
        if (s >= 0.0) b |= 1u << i;
      }
      out[r] = b;
    }
  }
  std::vector<std::uint32_t> buckets(std::span<const double> e) const {
    std::vector<std::uint32_t> out(rounds_);
    buckets(e, out.data());
    return out;
  }
  // Number of rounds where the two bucket vectors agree.
  std::size_t collisions(const std::uint32_t* a, const std::uint32_t* b) const {
    std::size_t n = 0;
    for (std::size_t r = 0; r < rounds_; ++r) n += a[r] == b[r];
    return n;
  }

 private:
  std::size_t dim_;
  std::size_t rounds_;
  std::size_t bits_;
  nn::Tensor2D planes_;
};

struct CollisionSelection {
  std::vector<std::size_t> positions;  // ascending
  std::vector<std::size_t> weights;    // collision counts, all >= 1
};

// Behaviors sharing at least one round's bucket with the target, weighted
// by the number of colliding rounds. bucket rows are rounds() wide.
CollisionSelection sdim_collision_select(const SdimHasher& hasher,
                                         std::span<const std::uint32_t> behavior_buckets,
                                         std::span<const std::uint8_t> mask,
                                         std::span<const std::uint32_t> target_buckets);

// TWIN's GSU score: (e_t W_Q) . (e_b W_K) / sqrt(d_h) over the full
// H*d_h projected width.
double twin_attention_score(std::span<const double> e_b, std::span<const double> e_t,
                            const nn::Tensor2D& w_q, const nn::Tensor2D& w_k,
                            std::size_t head_dim);

// Mask-aware mean of behavior embeddings (rows of `embeddings`).
std::vector<double> avg_pool_feature(const nn::Tensor2D& embeddings,
                                     std::span<const std::uint8_t> mask);

struct BaselineConfig {
  EmbeddingConfig embedding;
  ScoringMethod method = ScoringMethod::kAvgPool;
  std::size_t heads = 4;
  std::size_t head_dim = 8;
  std::size_t window = 10;  // l, for x_s
  std::size_t top_k = 60;   // K behaviors retrieved per sample
  std::size_t hash_bits = 64;
  std::vector<std::size_t> ctr_hidden = {200, 80};
  std::uint64_t hash_seed = 99;
};

void validate(const BaselineConfig& cfg);

// Shares everything with GenLI except the long-term interest part: x_l is
// either the projected average of the whole sequence, or target attention
// over the top-K behaviors chosen by a target-aware scoring kernel.
class BaselineModel : public CtrModel {
 public:
  explicit BaselineModel(BaselineConfig cfg);

  std::string name() const override { return to_string(cfg_.method); }
  void init(nn::ParameterStore& store, std::uint64_t seed) const override;
  ForwardResult forward(nn::Tape& t, nn::ParameterStore& store,
                        std::span<const data::Sample> batch) const override;

  // Per-sample retrieval (not used by avg-pool).
  Selection retrieve(const nn::ParameterStore& store, const data::BehaviorSequence& seq,
                     const data::Behavior& target) const;

  const BaselineConfig& config() const { return cfg_; }
  const BehaviorEmbedder& embedder() const { return embedder_; }
  const nn::MultiHeadAttention& esu() const { return esu_; }
  const nn::MultiHeadAttention& short_attention() const { return short_mha_; }
  const CtrHead& ctr_head() const { return ctr_; }

 private:
  BaselineConfig cfg_;
  BehaviorEmbedder embedder_;
  nn::MultiHeadAttention esu_;
  nn::MultiHeadAttention short_mha_;
  CtrHead ctr_;
  SimHash simhash_;
};

}  // namespace genli
