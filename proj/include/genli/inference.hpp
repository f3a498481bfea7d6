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

// Tape-free inference for trained models. Weights are copied out of a
// ParameterStore (optionally narrowed to float); per-user work (interest
// generation, retrieval, key/value projections) is done once per distinct
// history in the batch.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "genli/baselines.hpp"
#include "genli/data.hpp"
#include "genli/model.hpp"
#include "genli/nn/layers.hpp"
#include "genli/nn/parameter_store.hpp"

namespace genli {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
struct DenseWeights {
  Matrix<T> w;
  Matrix<T> b;  // 1 x out
  T slope = 0;
  nn::Activation activation = nn::Activation::kNone;

  Matrix<T> apply(const Matrix<T>& x) const;
};

template <typename T>
struct MlpWeights {
  std::vector<DenseWeights<T>> layers;

  Matrix<T> apply(const Matrix<T>& x) const;
};

template <typename T>
struct MhaWeights {
  Matrix<T> w_q, w_k, w_v, w_o;
  std::size_t heads = 0;
  std::size_t head_dim = 0;

  // Concatenated head outputs (heads*head_dim) of one projected query over
  // projected key/value rows [begin, begin + count); rows with valid == 0
  // are skipped. `scratch` holds at least `count` entries.
  void attend(const T* q, const Matrix<T>& kp, const Matrix<T>& vp, std::size_t begin,
              std::size_t count, const std::uint8_t* valid, T* scratch, T* out) const;
};

template <typename T>
struct EmbeddingWeights {
  Matrix<T> items;
  Matrix<T> categories;

  std::size_t dim() const { return static_cast<std::size_t>(items.cols() + categories.cols()); }
  // Writes the concatenated embedding of `b` into row `row` of `out`.
  void embed(const data::Behavior& b, Matrix<T>& out, Eigen::Index row) const;
};

// Wall-clock split of predict() calls. For TWIN the columns hold the
// per-user key/value projections, the GSU scoring with top-K, and the ESU
// with the CTR head.
struct StageTimes {
  double igm_ms = 0.0;  // window embedding, interest generation, relative distribution
  double brm_ms = 0.0;  // lookup retrieval
  double ifm_ms = 0.0;  // aggregation, fusion, CTR head

  double total_ms() const { return igm_ms + brm_ms + ifm_ms; }
  StageTimes& operator+=(const StageTimes& o);
};

template <typename T>
class GenliEngine {
 public:
  GenliEngine(const GenliModel& model, const nn::ParameterStore& store);

  // Click probabilities in sample order.
  std::vector<double> predict(std::span<const data::Sample> batch,
                              StageTimes* times = nullptr) const;

 private:
  struct Head {
    Matrix<T> query;  // 1 x d
    MhaWeights<T> mha;
    Matrix<T> w_h;
    MlpWeights<T> mlp;
  };
  Matrix<T> hidden(const Head& head, const Matrix<T>& window,
                   const std::vector<std::uint8_t>& valid, std::size_t users) const;

  GenliConfig cfg_;
  EmbeddingWeights<T> emb_;
  Head implicit_, explicit_;
  MhaWeights<T> kinds_[kInterestKinds];
  MhaWeights<T> short_;
  MlpWeights<T> gate_;
  Matrix<T> w_g_;
  MlpWeights<T> ctr_;
};

// TWIN-style path: the GSU scores every behavior with the ESU's own
// target-attention projections, then the ESU attends over the top-K.
// Behavior key/value projections are computed once per user and shared by
// all of that user's candidates.
template <typename T>
class TwinEngine {
 public:
  TwinEngine(const BaselineModel& model, const nn::ParameterStore& store);

  std::vector<double> predict(std::span<const data::Sample> batch,
                              StageTimes* times = nullptr) const;

 private:
  BaselineConfig cfg_;
  EmbeddingWeights<T> emb_;
  MhaWeights<T> esu_;
  MhaWeights<T> short_;
  MlpWeights<T> ctr_;
};

extern template class GenliEngine<float>;
extern template class GenliEngine<double>;
extern template class TwinEngine<float>;
extern template class TwinEngine<double>;

}  // namespace genli
