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


#include "genli/inference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "genli/brm.hpp"
#include "genli/errors.hpp"
#include "genli/igm.hpp"

namespace genli {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename T>
Matrix<T> load(const nn::ParameterStore& store, const std::string& name) {
  const nn::Tensor2D& v = store.at(name).value;
  Matrix<T> m(v.rows(), v.cols());
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t c = 0; c < v.cols(); ++c) m(r, c) = static_cast<T>(v(r, c));
  }
  return m;
}

template <typename T>
MlpWeights<T> load_mlp(const nn::ParameterStore& store, const nn::Mlp& mlp) {
  MlpWeights<T> out;
  for (const nn::Dense& d : mlp.layers()) {
    DenseWeights<T> w;
    w.w = load<T>(store, d.name() + ".w");
    w.b = load<T>(store, d.name() + ".b");
    w.activation = d.activation();
    if (d.activation() == nn::Activation::kPrelu) w.slope = load<T>(store, d.name() + ".prelu")(0, 0);
    out.layers.push_back(std::move(w));
  }
  return out;
}

template <typename T>
MhaWeights<T> load_mha(const nn::ParameterStore& store, const nn::MultiHeadAttention& mha) {
  MhaWeights<T> out;
  out.w_q = load<T>(store, mha.w_q());
  out.w_k = load<T>(store, mha.w_k());
  out.w_v = load<T>(store, mha.w_v());
  out.w_o = load<T>(store, mha.w_o());
  out.heads = mha.config().heads;
  out.head_dim = mha.config().head_dim;
  return out;
}

template <typename T>
EmbeddingWeights<T> load_embedding(const nn::ParameterStore& store, const BehaviorEmbedder& e) {
  return {load<T>(store, e.items().param_name()), load<T>(store, e.categories().param_name())};
}

template <typename T>
void softmax_rows(Matrix<T>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const T mx = row.maxCoeff();
    row = (row.array() - mx).exp();
    row /= row.sum();
  }
}

template <typename T>
T sigmoid(T z) {
  if (z >= 0) return T(1) / (T(1) + std::exp(-z));
  const T e = std::exp(z);
  return e / (T(1) + e);
}

// Users of a batch and, per user, the window embedding rows.
template <typename T>
struct WindowBlock {
  Matrix<T> embeddings;  // users*l x d
  std::vector<std::uint8_t> valid;
};

template <typename T>
WindowBlock<T> embed_windows(const EmbeddingWeights<T>& emb,
                             std::span<const data::BehaviorSequence* const> histories,
                             std::size_t l) {
  WindowBlock<T> out;
  out.embeddings.setZero(static_cast<Eigen::Index>(histories.size() * l),
                         static_cast<Eigen::Index>(emb.dim()));
  out.valid.reserve(histories.size() * l);
  for (std::size_t u = 0; u < histories.size(); ++u) {
    const ShortTermWindow w = short_term_window(*histories[u], l);
    if (w.valid_count() == 0) throw DataError("inference: user has no behaviors");
    for (std::size_t j = 0; j < l; ++j) {
      if (w.mask[j]) emb.embed(w.behaviors[j], out.embeddings, static_cast<Eigen::Index>(u * l + j));
    }
    out.valid.insert(out.valid.end(), w.mask.begin(), w.mask.end());
  }
  return out;
}

// Target attention of every sample over its user's group of `per_group`
// projected rows, followed by the output projection.
template <typename T>
Matrix<T> grouped_attention(const MhaWeights<T>& mha, const Matrix<T>& queries,
                            const Matrix<T>& kp, const Matrix<T>& vp,
                            const std::vector<std::uint8_t>& valid,
                            std::span<const std::size_t> group_of_query, std::size_t per_group) {
  const Matrix<T> qp = queries * mha.w_q;
  Matrix<T> heads(qp.rows(), qp.cols());
  std::vector<T> scratch(per_group);
  for (Eigen::Index i = 0; i < qp.rows(); ++i) {
    const std::size_t begin = group_of_query[static_cast<std::size_t>(i)] * per_group;
    mha.attend(qp.row(i).data(), kp, vp, begin, per_group, valid.data() + begin, scratch.data(),
               heads.row(i).data());
  }
  return heads * mha.w_o;
}

// Users of a batch in first-seen order, processed a chunk at a time so that
// per-user buffers (distributions, projections) stay bounded.
struct UserChunks {
  UserGroups users;
  std::vector<std::vector<std::size_t>> members;  // sample indices per user

  explicit UserChunks(std::span<const data::Sample> batch) : users(group_by_history(batch)) {
    members.resize(users.histories.size());
    for (std::size_t i = 0; i < batch.size(); ++i) members[users.of_sample[i]].push_back(i);
  }
};

struct Chunk {
  std::span<const data::BehaviorSequence* const> histories;
  std::vector<std::size_t> samples;     // batch indices
  std::vector<std::size_t> local_user;  // per entry of `samples`
};

Chunk make_chunk(const UserChunks& uc, std::size_t u0, std::size_t u1) {
  Chunk c;
  c.histories = std::span<const data::BehaviorSequence* const>(uc.users.histories).subspan(u0, u1 - u0);
  for (std::size_t u = u0; u < u1; ++u) {
    for (std::size_t i : uc.members[u]) {
      c.samples.push_back(i);
      c.local_user.push_back(u - u0);
    }
  }
  return c;
}

inline constexpr std::size_t kUserChunk = 256;

}  // namespace

StageTimes& StageTimes::operator+=(const StageTimes& o) {
  igm_ms += o.igm_ms;
  brm_ms += o.brm_ms;
  ifm_ms += o.ifm_ms;
  return *this;
}

template <typename T>
Matrix<T> DenseWeights<T>::apply(const Matrix<T>& x) const {
  Matrix<T> out = x * w;
  out.rowwise() += b.row(0);
  switch (activation) {
    case nn::Activation::kNone:
      break;
    case nn::Activation::kPrelu:
      out = out.unaryExpr([s = slope](T v) { return v > T(0) ? v : s * v; });
      break;
    case nn::Activation::kSigmoid:
      out = out.unaryExpr([](T v) { return sigmoid(v); });
      break;
  }
  return out;
}

template <typename T>
Matrix<T> MlpWeights<T>::apply(const Matrix<T>& x) const {
  Matrix<T> h = layers.front().apply(x);
  for (std::size_t i = 1; i < layers.size(); ++i) h = layers[i].apply(h);
  return h;
}

template <typename T>
void MhaWeights<T>::attend(const T* q, const Matrix<T>& kp, const Matrix<T>& vp,
                           std::size_t begin, std::size_t count, const std::uint8_t* valid,
                           T* scratch, T* out) const {
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(head_dim));
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * head_dim;
    const T* qh = q + off;
    T m = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < count; ++j) {
      if (!valid[j]) continue;
      const T* kh = kp.row(static_cast<Eigen::Index>(begin + j)).data() + off;
      T s = 0;
      for (std::size_t c = 0; c < head_dim; ++c) s += qh[c] * kh[c];
      scratch[j] = s * inv_sqrt;
      m = std::max(m, scratch[j]);
    }
    T z = 0;
    for (std::size_t j = 0; j < count; ++j) {
      if (!valid[j]) continue;
      scratch[j] = std::exp(scratch[j] - m);
      z += scratch[j];
    }
    T* oh = out + off;
    std::fill(oh, oh + head_dim, T(0));
    for (std::size_t j = 0; j < count; ++j) {
      if (!valid[j]) continue;
      const T w = scratch[j] / z;
      const T* vh = vp.row(static_cast<Eigen::Index>(begin + j)).data() + off;
      for (std::size_t c = 0; c < head_dim; ++c) oh[c] += w * vh[c];
    }
  }
}

template <typename T>
void EmbeddingWeights<T>::embed(const data::Behavior& b, Matrix<T>& out, Eigen::Index row) const {
  if (b.item >= static_cast<std::size_t>(items.rows()) ||
      b.category >= static_cast<std::size_t>(categories.rows())) {
    throw DataError("inference: behavior id outside the embedding tables");
  }
  out.row(row).head(items.cols()) = items.row(b.item);
  out.row(row).tail(categories.cols()) = categories.row(b.category);
}

template <typename T>
GenliEngine<T>::GenliEngine(const GenliModel& model, const nn::ParameterStore& store)
    : cfg_(model.config()), emb_(load_embedding<T>(store, model.embedder())) {
  auto head = [&](const InterestHead& h) {
    return Head{load<T>(store, h.query_name()), load_mha<T>(store, h.attention()),
                load<T>(store, h.projection_name()), load_mlp<T>(store, h.mlp())};
  };
  implicit_ = head(model.implicit_head());
  explicit_ = head(model.explicit_head());
  for (std::size_t k = 0; k < kInterestKinds; ++k) {
    if (cfg_.use_kind[k]) {
      kinds_[k] = load_mha<T>(store, model.kind_attention(static_cast<InterestKind>(k)));
    }
  }
  short_ = load_mha<T>(store, model.short_attention());
  gate_ = load_mlp<T>(store, model.fusion().gate_mlp());
  w_g_ = load<T>(store, model.fusion().projection_name());
  ctr_ = load_mlp<T>(store, model.ctr_head().mlp());
}

template <typename T>
Matrix<T> GenliEngine<T>::hidden(const Head& head, const Matrix<T>& window,
                                 const std::vector<std::uint8_t>& valid,
                                 std::size_t users) const {
  const std::size_t l = cfg_.window;
  const Eigen::Index d = window.cols();
  // Row 2u is e_1 of user u, row 2u+1 is e_q.
  Matrix<T> queries(static_cast<Eigen::Index>(2 * users), d);
  std::vector<std::size_t> group(2 * users);
  for (std::size_t u = 0; u < users; ++u) {
    queries.row(static_cast<Eigen::Index>(2 * u)) = window.row(static_cast<Eigen::Index>(u * l));
    queries.row(static_cast<Eigen::Index>(2 * u + 1)) = head.query.row(0);
    group[2 * u] = group[2 * u + 1] = u;
  }
  const Matrix<T> kp = window * head.mha.w_k;
  const Matrix<T> vp = window * head.mha.w_v;
  Matrix<T> out = grouped_attention(head.mha, queries, kp, vp, valid, group, l);
  const Eigen::Map<const Matrix<T>> pair(out.data(), static_cast<Eigen::Index>(users),
                                         2 * out.cols());
  return pair * head.w_h;
}

template <typename T>
std::vector<double> GenliEngine<T>::predict(std::span<const data::Sample> batch,
                                            StageTimes* times) const {
  if (batch.empty()) throw DataError("inference: empty batch");
  StageTimes st;
  auto started = Clock::now();
  const UserChunks uc(batch);
  st.igm_ms += ms_since(started);
  const std::size_t l = cfg_.window;
  const std::size_t k = cfg_.top_k;
  const auto d = static_cast<Eigen::Index>(emb_.dim());
  const auto dh = static_cast<Eigen::Index>(cfg_.head_dim);
  std::vector<double> out(batch.size());

  for (std::size_t u0 = 0; u0 < uc.users.histories.size(); u0 += kUserChunk) {
    const std::size_t u1 = std::min(uc.users.histories.size(), u0 + kUserChunk);
    const Chunk c = make_chunk(uc, u0, u1);
    const std::size_t u_count = u1 - u0;

    // Interest generation.
    started = Clock::now();
    const WindowBlock<T> window = embed_windows(emb_, c.histories, l);
    Matrix<T> p_implicit =
        implicit_.mlp.apply(hidden(implicit_, window.embeddings, window.valid, u_count));
    Matrix<T> p_explicit =
        explicit_.mlp.apply(hidden(explicit_, window.embeddings, window.valid, u_count));
    softmax_rows(p_implicit);
    softmax_rows(p_explicit);
    Matrix<T> p_relative;
    if (cfg_.use_kind[static_cast<int>(InterestKind::kRelative)]) {
      p_relative = p_explicit - p_implicit;
      softmax_rows(p_relative);
    }
    st.igm_ms += ms_since(started);

    // Lookup retrieval.
    started = Clock::now();
    const Matrix<T>* dists[kInterestKinds] = {&p_implicit, &p_explicit, &p_relative};
    std::vector<Selection> selected(u_count * kInterestKinds);
    const auto n = static_cast<std::size_t>(p_implicit.cols());
    for (std::size_t u = 0; u < u_count; ++u) {
      for (std::size_t kind = 0; kind < kInterestKinds; ++kind) {
        if (!cfg_.use_kind[kind]) continue;
        const T* row = dists[kind]->row(static_cast<Eigen::Index>(u)).data();
        selected[u * kInterestKinds + kind] =
            retrieve_topk<T>(*c.histories[u], std::span<const T>(row, n), k);
      }
    }
    st.brm_ms += ms_since(started);

    // Aggregation, fusion and the CTR head.
    started = Clock::now();
    const auto b = static_cast<Eigen::Index>(c.samples.size());
    Matrix<T> e_t(b, d);
    for (Eigen::Index i = 0; i < b; ++i) {
      emb_.embed(batch[c.samples[static_cast<std::size_t>(i)]].target, e_t, i);
    }
    Matrix<T> z = Matrix<T>::Zero(b, dh * static_cast<Eigen::Index>(kInterestKinds));
    std::vector<std::size_t> positions;
    for (std::size_t kind = 0; kind < kInterestKinds; ++kind) {
      if (!cfg_.use_kind[kind]) continue;
      Matrix<T> keys = Matrix<T>::Zero(static_cast<Eigen::Index>(u_count * k), d);
      std::vector<std::uint8_t> valid(u_count * k, 0);
      for (std::size_t u = 0; u < u_count; ++u) {
        positions.clear();
        for (std::size_t p : selected[u * kInterestKinds + kind].positions) {
          if (p != kPaddingPosition) positions.push_back(p);
        }
        std::sort(positions.begin(), positions.end());
        for (std::size_t j = 0; j < positions.size() && j < k; ++j) {
          emb_.embed(c.histories[u]->slots[positions[j]], keys,
                     static_cast<Eigen::Index>(u * k + j));
          valid[u * k + j] = 1;
        }
      }
      const MhaWeights<T>& mha = kinds_[kind];
      const Matrix<T> kp = keys * mha.w_k;
      const Matrix<T> vp = keys * mha.w_v;
      z.middleCols(static_cast<Eigen::Index>(kind) * dh, dh) =
          grouped_attention(mha, e_t, kp, vp, valid, c.local_user, k);
    }
    const Matrix<T> skp = window.embeddings * short_.w_k;
    const Matrix<T> svp = window.embeddings * short_.w_v;
    const Matrix<T> x_s =
        grouped_attention(short_, e_t, skp, svp, window.valid, c.local_user, l);

    const Matrix<T> gate = gate_.apply(z);
    const Matrix<T> x_l = gate.cwiseProduct(z) * w_g_;
    Matrix<T> input(b, 2 * dh + d);
    input << x_l, x_s, e_t;
    const Matrix<T> logits = ctr_.apply(input);
    for (Eigen::Index i = 0; i < b; ++i) {
      out[c.samples[static_cast<std::size_t>(i)]] = sigmoid(logits(i, 0));
    }
    st.ifm_ms += ms_since(started);
  }
  if (times) *times += st;
  return out;
}

template <typename T>
TwinEngine<T>::TwinEngine(const BaselineModel& model, const nn::ParameterStore& store)
    : cfg_(model.config()),
      emb_(load_embedding<T>(store, model.embedder())),
      esu_(load_mha<T>(store, model.esu())),
      short_(load_mha<T>(store, model.short_attention())),
      ctr_(load_mlp<T>(store, model.ctr_head().mlp())) {
  if (cfg_.method != ScoringMethod::kTwinAttention) {
    throw ConfigError(std::string("TwinEngine needs a twin_attention model, got ") +
                      to_string(cfg_.method));
  }
}

template <typename T>
std::vector<double> TwinEngine<T>::predict(std::span<const data::Sample> batch,
                                           StageTimes* times) const {
  if (batch.empty()) throw DataError("inference: empty batch");
  StageTimes st;
  const UserChunks uc(batch);
  const std::size_t l = cfg_.window;
  const std::size_t k = cfg_.top_k;
  const auto d = static_cast<Eigen::Index>(emb_.dim());
  const auto dh = static_cast<Eigen::Index>(cfg_.head_dim);
  const auto width = static_cast<Eigen::Index>(esu_.w_q.cols());
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(cfg_.head_dim));
  std::vector<double> out(batch.size());

  Matrix<T> e, kp, vp, sk(static_cast<Eigen::Index>(k), width), sv(static_cast<Eigen::Index>(k), width);
  std::vector<std::uint8_t> valid(k);
  std::vector<T> scratch(std::max(k, l));
  std::vector<std::size_t> positions;
  for (std::size_t u0 = 0; u0 < uc.users.histories.size(); u0 += kUserChunk) {
    const std::size_t u1 = std::min(uc.users.histories.size(), u0 + kUserChunk);
    const Chunk c = make_chunk(uc, u0, u1);
    const auto b = static_cast<Eigen::Index>(c.samples.size());

    auto started = Clock::now();
    Matrix<T> e_t(b, d);
    for (Eigen::Index i = 0; i < b; ++i) {
      emb_.embed(batch[c.samples[static_cast<std::size_t>(i)]].target, e_t, i);
    }
    const Matrix<T> q = e_t * esu_.w_q;
    Matrix<T> heads(b, width);
    st.igm_ms += ms_since(started);

    Eigen::Index row = 0;
    for (std::size_t u = 0; u < c.histories.size(); ++u) {
      // Key/value projections of the whole sequence, shared by the user's
      // candidates.
      started = Clock::now();
      const data::BehaviorSequence& seq = *c.histories[u];
      e.setZero(static_cast<Eigen::Index>(seq.length()), d);
      for (std::size_t j = 0; j < seq.length(); ++j) {
        if (seq.mask[j]) emb_.embed(seq.slots[j], e, static_cast<Eigen::Index>(j));
      }
      kp.noalias() = e * esu_.w_k;
      vp.noalias() = e * esu_.w_v;
      st.igm_ms += ms_since(started);

      for (std::size_t m = 0; m < uc.members[u0 + u].size(); ++m, ++row) {
        // GSU: full target-attention scoring of every behavior, then top-K.
        started = Clock::now();
        const T* qi = q.row(row).data();
        const Selection sel = select_topk(seq.length(), seq.mask, k, [&](std::size_t j) {
          const T* kj = kp.row(static_cast<Eigen::Index>(j)).data();
          T s = 0;
          for (Eigen::Index x = 0; x < width; ++x) s += qi[x] * kj[x];
          return s * inv_sqrt;
        });
        st.brm_ms += ms_since(started);

        // ESU over the selected behaviors.
        started = Clock::now();
        positions.clear();
        for (std::size_t p : sel.positions) {
          if (p != kPaddingPosition) positions.push_back(p);
        }
        std::sort(positions.begin(), positions.end());
        std::fill(valid.begin(), valid.end(), 0);
        for (std::size_t j = 0; j < positions.size(); ++j) {
          sk.row(static_cast<Eigen::Index>(j)) = kp.row(static_cast<Eigen::Index>(positions[j]));
          sv.row(static_cast<Eigen::Index>(j)) = vp.row(static_cast<Eigen::Index>(positions[j]));
          valid[j] = 1;
        }
        esu_.attend(qi, sk, sv, 0, k, valid.data(), scratch.data(), heads.row(row).data());
        st.ifm_ms += ms_since(started);
      }
    }

    // Short-term attention and the CTR head.
    started = Clock::now();
    const WindowBlock<T> window = embed_windows(emb_, c.histories, l);
    const Matrix<T> x_l = heads * esu_.w_o;
    const Matrix<T> skp = window.embeddings * short_.w_k;
    const Matrix<T> svp = window.embeddings * short_.w_v;
    const Matrix<T> x_s =
        grouped_attention(short_, e_t, skp, svp, window.valid, c.local_user, l);
    Matrix<T> input(b, 2 * dh + d);
    input << x_l, x_s, e_t;
    const Matrix<T> logits = ctr_.apply(input);
    for (Eigen::Index i = 0; i < b; ++i) {
      out[c.samples[static_cast<std::size_t>(i)]] = sigmoid(logits(i, 0));
    }
    st.ifm_ms += ms_since(started);
  }
  if (times) *times += st;
  return out;
}

template class GenliEngine<float>;
template class GenliEngine<double>;
template class TwinEngine<float>;
template class TwinEngine<double>;

}  // namespace genli
