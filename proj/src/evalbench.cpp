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

#include "genli/evalbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <tuple>

#include "genli/errors.hpp"
#include "genli/igm.hpp"
#include "genli/metrics.hpp"
#include "genli/random.hpp"
#include "genli/trainer.hpp"

namespace genli {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::string fmt(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

EvalReport eval_model(const CtrModel& model, nn::ParameterStore& store, const data::Dataset& ds,
                      std::size_t batch_size) {
  if (ds.samples.empty()) throw DataError("eval: empty dataset");
  if (batch_size == 0) throw ConfigError("eval: batch size must be >= 1");
  EvalReport r;
  r.model = model.name();
  r.samples = ds.samples.size();
  std::vector<double> scores;
  if (const auto* genli = dynamic_cast<const GenliModel*>(&model)) {
    const GenliEngine<double> engine(*genli, store);
    scores.reserve(ds.samples.size());
    const std::span<const data::Sample> all(ds.samples);
    for (std::size_t i = 0; i < all.size(); i += batch_size) {
      const auto part = engine.predict(all.subspan(i, std::min(batch_size, all.size() - i)),
                                       &r.stages);
      scores.insert(scores.end(), part.begin(), part.end());
    }
  } else {
    const auto started = Clock::now();
    scores = predict(model, store, ds.samples, batch_size);
    r.stages.ifm_ms = ms_between(started, Clock::now());
  }
  std::vector<int> labels(ds.samples.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = ds.samples[i].label;
    r.positives += labels[i] == 1;
    const double p = std::clamp(scores[i], kLogFloor, 1.0 - kLogFloor);
    loss -= labels[i] == 1 ? std::log(p) : std::log1p(-p);
  }
  r.log_loss = loss / static_cast<double>(labels.size());
  r.auc = auc(scores, labels);
  return r;
}

void write_eval_report(const EvalReport& r, const std::filesystem::path& path,
                       bool include_timing) {
  std::ofstream out = open_out(path);
  out << "model," << r.model << "\n"
      << "samples," << r.samples << "\n"
      << "positives," << r.positives << "\n"
      << "auc," << fmt(r.auc) << "\n"
      << "log_loss," << fmt(r.log_loss) << "\n";
  if (include_timing) {
    out << "igm_ms," << fmt(r.stages.igm_ms, 3) << "\n"
        << "brm_ms," << fmt(r.stages.brm_ms, 3) << "\n"
        << "ifm_ms," << fmt(r.stages.ifm_ms, 3) << "\n"
        << "total_ms," << fmt(r.stages.total_ms(), 3) << "\n";
  }
}

Dispersion summarize(std::vector<double> samples) {
  if (samples.empty()) throw DataError("summarize: no samples");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  Dispersion d;
  d.median = n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  d.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n)));
  d.p99 = samples[std::max<std::size_t>(rank, 1) - 1];
  return d;
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DataError("linear_fit_r2: need at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DataError("linear_fit_r2: x has no spread");
  if (syy == 0.0) return 1.0;
  // Bounded by 1 in exact arithmetic; rounding can overshoot on exact lines.
  return std::min(1.0, sxy * sxy / (sxx * syy));
}

void validate(const ScoringBenchConfig& cfg) {
  if (cfg.methods.empty()) throw ConfigError("bench: no methods");
  if (cfg.lengths.empty() || cfg.head_dims.empty()) throw ConfigError("bench: empty sweep");
  for (std::size_t v : cfg.lengths) {
    if (v == 0) throw ConfigError("bench: lengths must be >= 1");
  }
  for (std::size_t v : cfg.head_dims) {
    if (v == 0) throw ConfigError("bench: head dims must be >= 1");
  }
  if (cfg.length == 0 || cfg.head_dim == 0 || cfg.heads == 0) {
    throw ConfigError("bench: length, head_dim and heads must be >= 1");
  }
  if (cfg.hash_bits == 0) throw ConfigError("bench: hash_bits must be >= 1");
  if (cfg.sdim_rounds == 0 || cfg.sdim_bits_per_round == 0 || cfg.sdim_bits_per_round > 32) {
    throw ConfigError("bench: sdim needs rounds >= 1 and bits per round in [1, 32]");
  }
  if (cfg.distribution_size == 0 || cfg.top_k == 0) {
    throw ConfigError("bench: distribution_size and top_k must be >= 1");
  }
  if (cfg.repetitions == 0) throw ConfigError("bench: repetitions must be >= 1");
  if (!(cfg.min_repetition_ms >= 0.0)) throw ConfigError("bench: min_repetition_ms must be >= 0");
}

namespace {

// One user's sequence and one target, in every representation a kernel
// needs. Built before timing starts.
struct ScoringInputs {
  std::size_t length = 0;
  std::size_t dim = 0;    // d_h: width of behavior and target embeddings
  std::size_t width = 0;  // TWIN projected width
  std::vector<data::Behavior> behaviors;
  std::vector<std::uint8_t> mask;
  data::Behavior target;
  std::vector<float> p;            // lookup distribution
  std::vector<float> embeddings;   // length x dim
  std::vector<float> target_embedding;
  std::vector<float> keys;         // length x width, TWIN's cached projections
  std::vector<float> w_q;          // dim x width
  std::unique_ptr<SimHash> simhash;
  std::vector<std::uint64_t> signatures;  // length x words
  std::unique_ptr<SdimHasher> sdim;
  std::vector<std::uint32_t> buckets;     // length x rounds
  // Per-pass scratch.
  std::vector<float> scores;
  std::vector<float> query;
  std::vector<std::uint64_t> target_signature;
  std::vector<std::uint32_t> target_buckets;
};

ScoringInputs make_inputs(const ScoringBenchConfig& cfg, ScoringMethod m, std::size_t length,
                          std::size_t dim) {
  Rng rng = Rng::derive(cfg.seed, length * 1000 + dim);
  ScoringInputs in;
  in.length = length;
  in.dim = dim;
  in.width = cfg.heads * dim;
  const std::uint32_t items = 1u << 20;
  const std::uint32_t categories = 1000;
  in.behaviors.resize(length);
  for (auto& b : in.behaviors) {
    b.item = 1 + static_cast<std::uint32_t>(rng.below(items - 1));
    b.category = 1 + b.item % categories;
  }
  in.mask.assign(length, 1);
  in.target.item = 1 + static_cast<std::uint32_t>(rng.below(items - 1));
  in.target.category = 1 + in.target.item % categories;
  in.scores.assign(length, 0.0f);

  auto gaussian = [&](std::size_t n) {
    std::vector<float> v(n);
    for (float& x : v) x = static_cast<float>(rng.normal());
    return v;
  };
  switch (m) {
    case ScoringMethod::kGenliLookup: {
      in.p.resize(cfg.distribution_size);
      for (float& x : in.p) x = static_cast<float>(rng.uniform());
      const float sum = std::accumulate(in.p.begin(), in.p.end(), 0.0f);
      for (float& x : in.p) x /= sum;
      break;
    }
    case ScoringMethod::kSimHard:
      break;
    case ScoringMethod::kSimSoft:
    case ScoringMethod::kAvgPool:
      in.embeddings = gaussian(length * dim);
      in.target_embedding = gaussian(dim);
      in.query.resize(dim);
      break;
    case ScoringMethod::kEtaSimhash: {
      in.embeddings = gaussian(length * dim);
      in.target_embedding = gaussian(dim);
      in.simhash = std::make_unique<SimHash>(dim, cfg.hash_bits, cfg.seed + 1);
      const std::size_t w = in.simhash->words();
      in.signatures.resize(length * w);
      for (std::size_t i = 0; i < length; ++i) {
        in.simhash->fingerprint<float>({in.embeddings.data() + i * dim, dim},
                                       in.signatures.data() + i * w);
      }
      in.target_signature.resize(w);
      break;
    }
    case ScoringMethod::kSdimCollision: {
      in.embeddings = gaussian(length * dim);
      in.target_embedding = gaussian(dim);
      in.sdim = std::make_unique<SdimHasher>(dim, cfg.sdim_rounds, cfg.sdim_bits_per_round,
                                             cfg.seed + 2);
      const std::size_t r = cfg.sdim_rounds;
      in.buckets.resize(length * r);
      for (std::size_t i = 0; i < length; ++i) {
        in.sdim->buckets<float>({in.embeddings.data() + i * dim, dim}, in.buckets.data() + i * r);
      }
      in.target_buckets.resize(r);
      break;
    }
    case ScoringMethod::kTwinAttention:
      in.keys = gaussian(length * in.width);
      in.w_q = gaussian(dim * in.width);
      in.target_embedding = gaussian(dim);
      in.query.resize(in.width);
      break;
  }
  return in;
}

// Target-side preparation plus scoring of every behavior into in.scores.
void score_pass(ScoringMethod m, ScoringInputs& in) {
  const std::size_t n = in.length;
  const std::size_t d = in.dim;
  float* s = in.scores.data();
  switch (m) {
    case ScoringMethod::kGenliLookup: {
      const std::span<const float> p(in.p);
      for (std::size_t i = 0; i < n; ++i) s[i] = lookup_score<float>(in.behaviors[i].item, p);
      break;
    }
    case ScoringMethod::kSimHard:
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<float>(score_category_match(in.behaviors[i], in.target));
      }
      break;
    case ScoringMethod::kSimSoft: {
      const std::span<const float> t(in.target_embedding);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = score_inner_product<float>({in.embeddings.data() + i * d, d}, t);
      }
      break;
    }
    case ScoringMethod::kEtaSimhash: {
      in.simhash->fingerprint<float>(in.target_embedding, in.target_signature.data());
      const std::size_t w = in.simhash->words();
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<float>(
            in.simhash->score(in.signatures.data() + i * w, in.target_signature.data()));
      }
      break;
    }
    case ScoringMethod::kSdimCollision: {
      in.sdim->buckets<float>(in.target_embedding, in.target_buckets.data());
      const std::size_t r = in.sdim->rounds();
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<float>(
            in.sdim->collisions(in.buckets.data() + i * r, in.target_buckets.data()));
      }
      break;
    }
    case ScoringMethod::kTwinAttention: {
      const std::size_t w = in.width;
      std::fill(in.query.begin(), in.query.end(), 0.0f);
      for (std::size_t r = 0; r < d; ++r) {
        const float e = in.target_embedding[r];
        for (std::size_t c = 0; c < w; ++c) in.query[c] += e * in.w_q[r * w + c];
      }
      const float inv = 1.0f / std::sqrt(static_cast<float>(d));
      const std::span<const float> q(in.query);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = score_inner_product<float>({in.keys.data() + i * w, w}, q) * inv;
      }
      break;
    }
    case ScoringMethod::kAvgPool: {
      // No per-behavior score: the whole sequence is summed into one row.
      std::fill(in.query.begin(), in.query.end(), 0.0f);
      for (std::size_t i = 0; i < n; ++i) {
        const float* e = in.embeddings.data() + i * d;
        for (std::size_t c = 0; c < d; ++c) in.query[c] += e[c];
      }
      s[0] = in.query[0];
      break;
    }
  }
}

volatile float g_sink = 0.0f;

void full_pass(ScoringMethod m, ScoringInputs& in, std::size_t k) {
  score_pass(m, in);
  if (m == ScoringMethod::kAvgPool) {
    g_sink = g_sink + in.scores[0];
    return;
  }
  const Selection sel =
      select_topk(in.length, in.mask, k, [&](std::size_t i) { return in.scores[i]; });
  g_sink = g_sink + static_cast<float>(sel.scores.front());
}

// Grows the inner loop until one repetition lasts min_ms; the calibration
// runs double as warm-up.
template <typename Fn>
std::size_t calibrate(Fn&& fn, double min_ms) {
  std::size_t inner = 1;
  for (;;) {
    const auto a = Clock::now();
    for (std::size_t r = 0; r < inner; ++r) fn();
    if (ms_between(a, Clock::now()) >= min_ms || inner >= (std::size_t{1} << 30)) return inner;
    inner *= 2;
  }
}

BenchResult run_one(const ScoringBenchConfig& cfg, ScoringMethod m, std::size_t length,
                    std::size_t dim) {
  ScoringInputs in = make_inputs(cfg, m, length, dim);
  BenchResult r;
  r.method = m;
  r.length = length;
  r.head_dim = dim;
  r.bits = m == ScoringMethod::kEtaSimhash      ? cfg.hash_bits
           : m == ScoringMethod::kSdimCollision ? cfg.sdim_rounds * cfg.sdim_bits_per_round
                                                : 0;
  r.repetitions = cfg.repetitions;

  auto scoring = [&] {
    score_pass(m, in);
    g_sink = g_sink + in.scores[length / 2];
  };
  r.inner = calibrate(scoring, cfg.min_repetition_ms);
  std::vector<double> ns(cfg.repetitions);
  for (double& v : ns) {
    const auto a = Clock::now();
    for (std::size_t i = 0; i < r.inner; ++i) scoring();
    v = ms_between(a, Clock::now()) * 1e6 /
        static_cast<double>(r.inner * length);
  }
  r.ns_per_behavior = summarize(std::move(ns));

  auto full = [&] { full_pass(m, in, cfg.top_k); };
  const std::size_t inner = calibrate(full, cfg.min_repetition_ms);
  std::vector<double> ms(cfg.repetitions);
  for (double& v : ms) {
    const auto a = Clock::now();
    for (std::size_t i = 0; i < inner; ++i) full();
    v = ms_between(a, Clock::now()) / static_cast<double>(inner);
  }
  r.total_ms = summarize(std::move(ms)).median;
  return r;
}

}  // namespace

std::vector<BenchResult> bench_scoring(const ScoringBenchConfig& cfg) {
  validate(cfg);
  std::vector<std::pair<std::size_t, std::size_t>> grid;
  for (std::size_t len : cfg.lengths) grid.emplace_back(len, cfg.head_dim);
  for (std::size_t dh : cfg.head_dims) {
    if (std::find(grid.begin(), grid.end(), std::pair{cfg.length, dh}) == grid.end()) {
      grid.emplace_back(cfg.length, dh);
    }
  }
  std::vector<BenchResult> out;
  for (ScoringMethod m : cfg.methods) {
    for (const auto& [len, dh] : grid) out.push_back(run_one(cfg, m, len, dh));
  }
  return out;
}

void write_scoring_csv(const std::vector<BenchResult>& results,
                       const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "method,length,head_dim,bits,repetitions,inner,ns_per_behavior_median,"
         "ns_per_behavior_mean,ns_per_behavior_p99,total_ms\n";
  for (const BenchResult& r : results) {
    out << to_string(r.method) << ',' << r.length << ',' << r.head_dim << ',' << r.bits << ','
        << r.repetitions << ',' << r.inner << ',' << fmt(r.ns_per_behavior.median, 4) << ','
        << fmt(r.ns_per_behavior.mean, 4) << ',' << fmt(r.ns_per_behavior.p99, 4) << ','
        << fmt(r.total_ms, 6) << "\n";
  }
}

const BenchResult* find_result(const std::vector<BenchResult>& results, ScoringMethod m,
                               std::size_t length, std::size_t head_dim) {
  for (const BenchResult& r : results) {
    if (r.method == m && r.length == length && r.head_dim == head_dim) return &r;
  }
  return nullptr;
}

ScalingSummary summarize_scaling(const std::vector<BenchResult>& results,
                                 const ScoringBenchConfig& cfg) {
  auto need = [&](ScoringMethod m, std::size_t length, std::size_t head_dim) {
    const BenchResult* r = find_result(results, m, length, head_dim);
    if (!r) {
      throw ConfigError(std::string("scaling summary needs ") + to_string(m) + " at L=" +
                        std::to_string(length) + ", d_h=" + std::to_string(head_dim));
    }
    return r;
  };
  const auto [lo, hi] = std::minmax_element(cfg.head_dims.begin(), cfg.head_dims.end());
  ScalingSummary s;
  std::vector<double> x, y;
  for (std::size_t len : cfg.lengths) {
    x.push_back(static_cast<double>(len));
    y.push_back(need(ScoringMethod::kGenliLookup, len, cfg.head_dim)->total_ms);
  }
  s.lookup_length_r2 = x.size() >= 2 ? linear_fit_r2(x, y) : 0.0;
  auto ratio = [&](ScoringMethod m) {
    return need(m, cfg.length, *hi)->ns_per_behavior.median /
           need(m, cfg.length, *lo)->ns_per_behavior.median;
  };
  s.lookup_head_dim_ratio = ratio(ScoringMethod::kGenliLookup);
  s.inner_product_head_dim_ratio = ratio(ScoringMethod::kSimSoft);
  s.lookup_ns = need(ScoringMethod::kGenliLookup, cfg.length, cfg.head_dim)->ns_per_behavior.median;
  s.target_attention_ns =
      need(ScoringMethod::kTwinAttention, cfg.length, cfg.head_dim)->ns_per_behavior.median;
  return s;
}

void write_scaling_csv(const ScalingSummary& s, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "metric,value\n"
      << "lookup_length_r2," << fmt(s.lookup_length_r2, 6) << "\n"
      << "lookup_head_dim_ratio," << fmt(s.lookup_head_dim_ratio, 4) << "\n"
      << "inner_product_head_dim_ratio," << fmt(s.inner_product_head_dim_ratio, 4) << "\n"
      << "lookup_ns," << fmt(s.lookup_ns, 4) << "\n"
      << "target_attention_ns," << fmt(s.target_attention_ns, 4) << "\n";
}

void validate(const LatencyBenchConfig& cfg) {
  if (cfg.batch == 0 || cfg.length == 0) throw ConfigError("latency: batch and length >= 1");
  if (cfg.candidates_per_user.empty()) throw ConfigError("latency: no candidates_per_user");
  for (std::size_t c : cfg.candidates_per_user) {
    if (c == 0 || c > cfg.batch) {
      throw ConfigError("latency: candidates_per_user must lie in [1, batch]");
    }
  }
  if (cfg.items < 2 || cfg.categories < 2) throw ConfigError("latency: items, categories >= 2");
  if (cfg.repetitions == 0) throw ConfigError("latency: repetitions must be >= 1");
}

namespace {

std::vector<data::Sample> latency_batch(const LatencyBenchConfig& cfg, std::size_t per_user) {
  Rng rng = Rng::derive(cfg.seed, per_user);
  auto behavior = [&](std::int64_t ts) {
    data::Behavior b;
    b.item = 1 + static_cast<std::uint32_t>(rng.below(cfg.items - 1));
    b.category = 1 + static_cast<std::uint32_t>(b.item % (cfg.categories - 1));
    b.timestamp = ts;
    return b;
  };
  std::vector<data::Sample> batch(cfg.batch);
  std::shared_ptr<const data::BehaviorSequence> history;
  for (std::size_t i = 0; i < cfg.batch; ++i) {
    if (i % per_user == 0) {
      std::vector<data::Behavior> raw(cfg.length);
      for (std::size_t j = 0; j < raw.size(); ++j) raw[j] = behavior(static_cast<std::int64_t>(j));
      history = std::make_shared<const data::BehaviorSequence>(
          data::make_sequence(std::move(raw), cfg.length));
    }
    batch[i].user_id = i / per_user;
    batch[i].history = history;
    batch[i].target = behavior(0);
  }
  return batch;
}

}  // namespace

std::vector<LatencyResult> bench_latency(const LatencyBenchConfig& cfg) {
  validate(cfg);
  EmbeddingConfig emb;
  emb.item_vocab_size = cfg.items;
  emb.category_vocab_size = cfg.categories;
  GenliConfig gcfg;
  gcfg.embedding = emb;
  const GenliModel genli(gcfg);
  nn::ParameterStore genli_store;
  genli.init(genli_store, cfg.seed);
  BaselineConfig tcfg;
  tcfg.embedding = emb;
  tcfg.method = ScoringMethod::kTwinAttention;
  const BaselineModel twin(tcfg);
  nn::ParameterStore twin_store;
  twin.init(twin_store, cfg.seed);
  const GenliEngine<float> genli_engine(genli, genli_store);
  const TwinEngine<float> twin_engine(twin, twin_store);

  std::vector<LatencyResult> out;
  for (std::size_t per_user : cfg.candidates_per_user) {
    const std::vector<data::Sample> batch = latency_batch(cfg, per_user);
    genli_engine.predict(batch);  // warm-up
    twin_engine.predict(batch);
    std::vector<double> g_ms, t_ms;
    StageTimes g_st, t_st;
    for (std::size_t r = 0; r < cfg.repetitions; ++r) {
      StageTimes s;
      auto a = Clock::now();
      genli_engine.predict(batch, &s);
      g_ms.push_back(ms_between(a, Clock::now()));
      g_st += s;
      s = {};
      a = Clock::now();
      twin_engine.predict(batch, &s);
      t_ms.push_back(ms_between(a, Clock::now()));
      t_st += s;
    }
    const double inv = 1.0 / static_cast<double>(cfg.repetitions);
    auto scaled = [inv](StageTimes s) {
      s.igm_ms *= inv;
      s.brm_ms *= inv;
      s.ifm_ms *= inv;
      return s;
    };
    for (auto [name, ms, st] : {std::tuple{"genli", &g_ms, g_st},
                                std::tuple{"twin_attention", &t_ms, t_st}}) {
      LatencyResult r;
      r.model = name;
      r.batch = cfg.batch;
      r.length = cfg.length;
      r.candidates_per_user = per_user;
      r.repetitions = cfg.repetitions;
      r.batch_ms = summarize(*ms);
      r.mean_stages = scaled(st);
      out.push_back(r);
    }
  }
  return out;
}

void write_latency_csv(const std::vector<LatencyResult>& results,
                       const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "model,batch,length,candidates_per_user,repetitions,batch_ms_median,batch_ms_mean,"
         "batch_ms_p99,igm_ms,brm_ms,ifm_ms\n";
  for (const LatencyResult& r : results) {
    out << r.model << ',' << r.batch << ',' << r.length << ',' << r.candidates_per_user << ','
        << r.repetitions << ',' << fmt(r.batch_ms.median, 3) << ',' << fmt(r.batch_ms.mean, 3)
        << ',' << fmt(r.batch_ms.p99, 3) << ',' << fmt(r.mean_stages.igm_ms, 3) << ','
        << fmt(r.mean_stages.brm_ms, 3) << ',' << fmt(r.mean_stages.ifm_ms, 3) << "\n";
  }
}

}  // namespace genli
