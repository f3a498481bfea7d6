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
#include <filesystem>
#include <string>
#include <vector>

#include "genli/baselines.hpp"
#include "genli/data.hpp"
#include "genli/inference.hpp"
#include "genli/model.hpp"
#include "genli/nn/parameter_store.hpp"

namespace genli {

struct EvalReport {
  std::string model;
  std::size_t samples = 0;
  std::size_t positives = 0;
  double auc = 0.0;
  double log_loss = 0.0;
  // Stage split for GenLI (tape-free engine); other models report their
  // whole forward pass as ifm_ms.
  StageTimes stages;
};

// Scores `ds` with the trained parameters. GenLI runs on the tape-free
// engine; every other model on the tape forward.
EvalReport eval_model(const CtrModel& model, nn::ParameterStore& store, const data::Dataset& ds,
                      std::size_t batch_size = 1024);
// key,value lines; timings only when asked so that the rest stays
// byte-reproducible.
void write_eval_report(const EvalReport& r, const std::filesystem::path& path,
                       bool include_timing);

// Summary of repeated timings.
struct Dispersion {
  double median = 0.0;
  double mean = 0.0;
  double p99 = 0.0;
};
Dispersion summarize(std::vector<double> samples);

// Coefficient of determination of the least-squares line through (x, y).
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

struct ScoringBenchConfig {
  std::vector<ScoringMethod> methods = {
      ScoringMethod::kGenliLookup,   ScoringMethod::kSimHard,     ScoringMethod::kSimSoft,
      ScoringMethod::kEtaSimhash,    ScoringMethod::kSdimCollision,
      ScoringMethod::kTwinAttention, ScoringMethod::kAvgPool};
  // L sweep at head_dim, d_h sweep at length.
  std::vector<std::size_t> lengths = {1000, 2000, 4000, 8000, 16000, 32000, 64000};
  std::vector<std::size_t> head_dims = {8, 16, 32, 64, 128};
  std::size_t length = 1000;
  std::size_t head_dim = 8;
  std::size_t heads = 4;             // TWIN projected width is heads * d_h
  std::size_t hash_bits = 64;        // m
  std::size_t sdim_rounds = 4;
  std::size_t sdim_bits_per_round = 8;
  std::size_t distribution_size = 4096;
  std::size_t top_k = 20;
  std::size_t repetitions = 7;       // timed, after one warm-up
  double min_repetition_ms = 2.0;    // inner loop grows until a repetition lasts this long
  std::uint64_t seed = 7;
};

void validate(const ScoringBenchConfig& cfg);

struct BenchResult {
  ScoringMethod method = ScoringMethod::kGenliLookup;
  std::size_t length = 0;
  std::size_t head_dim = 0;
  std::size_t bits = 0;
  std::size_t repetitions = 0;
  std::size_t inner = 0;  // scoring passes per repetition
  Dispersion ns_per_behavior;  // scoring only
  double total_ms = 0.0;       // median of one full pass: scoring plus top-k
};

// Inputs are generated outside the timed region; only the per-target work
// (target-side hashing or projection, per-behavior scoring, selection) is
// timed.
std::vector<BenchResult> bench_scoring(const ScoringBenchConfig& cfg);
void write_scoring_csv(const std::vector<BenchResult>& results, const std::filesystem::path& path);
const BenchResult* find_result(const std::vector<BenchResult>& results, ScoringMethod m,
                               std::size_t length, std::size_t head_dim);

// Scaling figures derived from a bench_scoring table.
struct ScalingSummary {
  // Line fit of GenLI total retrieval time against L at the base head_dim.
  double lookup_length_r2 = 0.0;
  // Per-behavior median at the largest head_dim over the smallest, at the
  // base length.
  double lookup_head_dim_ratio = 0.0;
  double inner_product_head_dim_ratio = 0.0;
  // Per-behavior medians at the base length and head_dim.
  double lookup_ns = 0.0;
  double target_attention_ns = 0.0;
};

// ConfigError when the table lacks the genli_lookup, sim_soft or
// twin_attention rows the figures need.
ScalingSummary summarize_scaling(const std::vector<BenchResult>& results,
                                 const ScoringBenchConfig& cfg);
void write_scaling_csv(const ScalingSummary& s, const std::filesystem::path& path);

struct LatencyBenchConfig {
  std::size_t batch = 8192;
  std::size_t length = 1000;
  // Candidates scored per user request; a batch holds batch / c users.
  std::vector<std::size_t> candidates_per_user = {32, 1};
  std::size_t items = 100000;
  std::size_t categories = 1000;
  std::size_t repetitions = 5;
  std::uint64_t seed = 11;
};

void validate(const LatencyBenchConfig& cfg);

struct LatencyResult {
  std::string model;  // "genli" or "twin_attention"
  std::size_t batch = 0;
  std::size_t length = 0;
  std::size_t candidates_per_user = 0;
  std::size_t repetitions = 0;
  Dispersion batch_ms;
  StageTimes mean_stages;
};

// End-to-end float inference of randomly initialized GenLI and TWIN models
// (default sizes) on the same generated batch.
std::vector<LatencyResult> bench_latency(const LatencyBenchConfig& cfg);
void write_latency_csv(const std::vector<LatencyResult>& results,
                       const std::filesystem::path& path);

}  // namespace genli
