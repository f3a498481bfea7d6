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
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace genli::data {

// Index 0 of every vocabulary is reserved for padding / unknown values.
inline constexpr std::uint32_t kPaddingIndex = 0;

struct Behavior {
  std::uint32_t item = kPaddingIndex;
  std::uint32_t category = kPaddingIndex;
  std::int64_t timestamp = 0;

  bool is_padding() const { return item == kPaddingIndex; }
  friend bool operator==(const Behavior&, const Behavior&) = default;
};

// Exactly `length` slots, newest first; padding fills the tail.
struct BehaviorSequence {
  std::vector<Behavior> slots;
  std::vector<std::uint8_t> mask;

  std::size_t length() const { return slots.size(); }
  std::size_t valid_count() const;
  friend bool operator==(const BehaviorSequence&, const BehaviorSequence&) = default;
};

// Sorts newest first (stable on equal timestamps), keeps the `length` most
// recent behaviors and pads the rest.
BehaviorSequence make_sequence(std::vector<Behavior> behaviors, std::size_t length);

struct Sample {
  std::uint64_t user_id = 0;
  // Impressions of the same user at the same time share one history.
  std::shared_ptr<const BehaviorSequence> history;
  Behavior target;
  int label = 0;
  std::optional<std::uint32_t> exposed_item;
};

// Exposed item for the implicit-interest loss: the logged one when present,
// otherwise the most recent history behavior sharing the target's category,
// otherwise the most recent behavior. DataError when nothing is available.
std::uint32_t exposed_or_surrogate(const Sample& sample);

struct Dataset {
  std::vector<Sample> samples;
  std::size_t item_vocab_size = 0;
  std::size_t category_vocab_size = 0;
  std::size_t sequence_length = 0;
};

// raw_value<TAB>index per line.
class Vocabulary {
 public:
  static Vocabulary load(const std::filesystem::path& path);
  // Identity mapping "i<TAB>i" for i in [1, size).
  static Vocabulary identity(std::size_t size);
  void save(const std::filesystem::path& path) const;

  std::optional<std::uint32_t> lookup(std::string_view raw) const;
  // One past the largest index.
  std::size_t size() const { return size_; }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::pair<std::string, std::uint32_t>> entries_;
  std::size_t size_ = 1;
};

struct DatasetSchema {
  std::size_t sequence_length = 100;
  // When set, raw tokens are mapped through the vocabulary and unknown values
  // become index 0. Otherwise tokens must already be integer indices.
  std::optional<Vocabulary> items;
  std::optional<Vocabulary> categories;
};

struct LoadStats {
  std::size_t lines = 0;
  std::size_t unknown_items = 0;
  std::size_t unknown_categories = 0;
};

// Streaming reader for the record format
//   user_id TAB target_item TAB target_category TAB label TAB exposed_item TAB behaviors
// where exposed_item may be empty or "-" and behaviors is a comma separated
// list of item:category:timestamp triples. Malformed lines raise DataError
// naming the file and line number.
class DatasetReader {
 public:
  DatasetReader(const std::filesystem::path& path, DatasetSchema schema);

  // False at end of file.
  bool next(Sample& sample);
  const LoadStats& stats() const { return stats_; }
  std::size_t max_item_index() const { return max_item_; }
  std::size_t max_category_index() const { return max_category_; }

 private:
  struct CachedHistory {
    std::string raw;
    std::shared_ptr<const BehaviorSequence> sequence;
  };
  [[noreturn]] void fail(const std::string& message) const;
  std::uint32_t map_item(std::string_view token);
  std::uint32_t map_category(std::string_view token);

  std::filesystem::path path_;
  std::ifstream in_;
  DatasetSchema schema_;
  LoadStats stats_;
  std::size_t max_item_ = 0;
  std::size_t max_category_ = 0;
  std::unordered_map<std::uint64_t, CachedHistory> histories_;
};

Dataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema,
                     LoadStats* stats = nullptr);
// Writes indices as raw tokens; histories are written oldest first.
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Planted-interest generator. Each user owns `clusters_per_user` categories
// and browses them in phases; the last phase is the current cluster c_now.
// Every category c has a linked category link(c), and a share of the
// impressions shows items of link(c_now). Whether such an impression is
// clicked depends on whether link(c_now) is one of the user's clusters,
// which only the long-term history reveals.
//
// Two more related categories separate exposure from click behaviour:
// niche(c) = link(link(c)) is rarely shown but clicked at the linked rate,
// and promoted(c) = link(niche(c)) is shown often but clicked at the lower
// rate p_promoted_hi even when it is one of the user's clusters. Exposures
// then concentrate on promoted items, clicks on linked items, and the
// click-to-exposure ratio on niche items.
struct SyntheticSpec {
  std::size_t users = 2000;
  std::size_t items = 4000;
  std::size_t categories = 100;
  std::size_t clusters_per_user = 8;
  std::size_t sequence_length = 500;
  std::size_t impressions_per_user = 50;
  // Share of history behaviors taken from the phase's cluster; the rest are
  // random items.
  double phase_share = 0.9;
  // Share of impressions whose target lies in link(c_now).
  double linked_targets = 0.5;
  // Probability that link(c_now) is one of the user's clusters.
  double linked_in_cluster = 0.5;
  // Shares of impressions whose target lies in niche(c_now) and
  // promoted(c_now), and the probabilities that those are user clusters.
  double niche_targets = 0.0;
  double niche_in_cluster = 0.8;
  double promoted_targets = 0.0;
  double promoted_in_cluster = 0.5;
  // Share of the remaining impressions whose target lies inside a cluster.
  double in_cluster_targets = 0.5;
  double p_hi = 0.9;
  double p_lo = 0.1;
  // Click probability of a promoted item that lies inside a cluster.
  double p_promoted_hi = 0.35;
  // Record every impression as an exposure (exposed item = target).
  bool log_exposures = true;
  std::uint64_t seed = 2024;
};

void validate(const SyntheticSpec& spec);

// The tuned setting used by the CLI defaults and the learning checks:
// linked, niche and promoted impressions with nearly noiseless clicks.
SyntheticSpec planted_interest_spec();

struct SyntheticData {
  // Every impression with its sampled click; not yet rebalanced.
  std::vector<Sample> impressions;
  // Per impression: whether the target fell inside one of the user's clusters.
  std::vector<std::uint8_t> in_cluster;
  // Per impression: the user's current cluster c_now.
  std::vector<std::uint32_t> current_cluster;
  std::size_t item_vocab_size = 0;
  std::size_t category_vocab_size = 0;
  std::size_t sequence_length = 0;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);
// Category of a synthetic item (items are laid out in contiguous blocks).
std::uint32_t synthetic_category(const SyntheticSpec& spec, std::uint32_t item);
// link(c) for every category, indexed by category (entry 0 unused). A single
// cycle over all categories, so link(c) != c.
std::vector<std::uint32_t> synthetic_links(const SyntheticSpec& spec);

}  // namespace genli::data
