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

#include "genli/data.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "genli/errors.hpp"
#include "genli/random.hpp"

namespace genli::data {

std::size_t BehaviorSequence::valid_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

BehaviorSequence make_sequence(std::vector<Behavior> behaviors, std::size_t length) {
  std::stable_sort(behaviors.begin(), behaviors.end(),
                   [](const Behavior& a, const Behavior& b) { return a.timestamp > b.timestamp; });
  std::erase_if(behaviors, [](const Behavior& b) { return b.is_padding(); });
  if (behaviors.size() > length) behaviors.resize(length);
  BehaviorSequence seq;
  seq.mask.assign(length, 0);
  std::fill(seq.mask.begin(), seq.mask.begin() + static_cast<std::ptrdiff_t>(behaviors.size()), 1);
  behaviors.resize(length);
  seq.slots = std::move(behaviors);
  return seq;
}

std::uint32_t exposed_or_surrogate(const Sample& sample) {
  if (sample.exposed_item) return *sample.exposed_item;
  if (sample.history) {
    const auto& seq = *sample.history;
    for (std::size_t i = 0; i < seq.length(); ++i) {
      if (seq.mask[i] && seq.slots[i].category == sample.target.category) {
        return seq.slots[i].item;
      }
    }
    for (std::size_t i = 0; i < seq.length(); ++i) {
      if (seq.mask[i]) return seq.slots[i].item;
    }
  }
  throw DataError("sample of user " + std::to_string(sample.user_id) +
                  " has no exposed item and an empty history");
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
std::optional<T> parse_int(std::string_view s) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

}  // namespace

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary " + path.string());
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = split(line, '\t');
    const auto index = parts.size() == 2 ? parse_int<std::uint32_t>(parts[1]) : std::nullopt;
    if (!index) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected raw_value<TAB>index");
    }
    vocab.index_[std::string(parts[0])] = *index;
    vocab.entries_.emplace_back(std::string(parts[0]), *index);
    vocab.size_ = std::max<std::size_t>(vocab.size_, *index + 1);
  }
  return vocab;
}

Vocabulary Vocabulary::identity(std::size_t size) {
  Vocabulary vocab;
  for (std::uint32_t i = 1; i < size; ++i) {
    vocab.index_[std::to_string(i)] = i;
    vocab.entries_.emplace_back(std::to_string(i), i);
  }
  vocab.size_ = std::max<std::size_t>(size, 1);
  return vocab;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write vocabulary " + path.string());
  for (const auto& [raw, index] : entries_) out << raw << '\t' << index << '\n';
}

std::optional<std::uint32_t> Vocabulary::lookup(std::string_view raw) const {
  auto it = index_.find(std::string(raw));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

DatasetReader::DatasetReader(const std::filesystem::path& path, DatasetSchema schema)
    : path_(path), in_(path), schema_(std::move(schema)) {
  if (!in_) throw DataError("cannot open dataset " + path.string());
  if (schema_.sequence_length == 0) throw ConfigError("sequence length must be positive");
}

void DatasetReader::fail(const std::string& message) const {
  throw DataError(path_.string() + ":" + std::to_string(stats_.lines) + ": " + message);
}

std::uint32_t DatasetReader::map_item(std::string_view token) {
  std::uint32_t index;
  if (schema_.items) {
    auto found = schema_.items->lookup(token);
    if (!found) ++stats_.unknown_items;
    index = found.value_or(kPaddingIndex);
  } else {
    auto parsed = parse_int<std::uint32_t>(token);
    if (!parsed) fail("item '" + std::string(token) + "' is not an index");
    index = *parsed;
  }
  max_item_ = std::max<std::size_t>(max_item_, index);
  return index;
}

std::uint32_t DatasetReader::map_category(std::string_view token) {
  std::uint32_t index;
  if (schema_.categories) {
    auto found = schema_.categories->lookup(token);
    if (!found) ++stats_.unknown_categories;
    index = found.value_or(kPaddingIndex);
  } else {
    auto parsed = parse_int<std::uint32_t>(token);
    if (!parsed) fail("category '" + std::string(token) + "' is not an index");
    index = *parsed;
  }
  max_category_ = std::max<std::size_t>(max_category_, index);
  return index;
}

bool DatasetReader::next(Sample& sample) {
  std::string line;
  while (std::getline(in_, line)) {
    ++stats_.lines;
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 6) {
      fail("expected 6 tab-separated fields, found " + std::to_string(fields.size()));
    }
    Sample s;
    const auto user = parse_int<std::uint64_t>(fields[0]);
    if (!user) fail("bad user id '" + std::string(fields[0]) + "'");
    s.user_id = *user;
    s.target.item = map_item(fields[1]);
    s.target.category = map_category(fields[2]);
    const auto label = parse_int<int>(fields[3]);
    if (!label || (*label != 0 && *label != 1)) fail("label must be 0 or 1");
    s.label = *label;
    if (!fields[4].empty() && fields[4] != "-") s.exposed_item = map_item(fields[4]);

    CachedHistory& cached = histories_[s.user_id];
    if (cached.sequence && cached.raw == fields[5]) {
      s.history = cached.sequence;
    } else {
      std::vector<Behavior> behaviors;
      if (!fields[5].empty()) {
        for (std::string_view triple : split(fields[5], ',')) {
          const auto parts = split(triple, ':');
          if (parts.size() != 3) fail("behavior '" + std::string(triple) + "' is not item:category:timestamp");
          const auto ts = parse_int<std::int64_t>(parts[2]);
          if (!ts) fail("bad timestamp in '" + std::string(triple) + "'");
          behaviors.push_back({map_item(parts[0]), map_category(parts[1]), *ts});
        }
      }
      cached.raw = std::string(fields[5]);
      cached.sequence = std::make_shared<const BehaviorSequence>(
          make_sequence(std::move(behaviors), schema_.sequence_length));
      s.history = cached.sequence;
    }
    sample = std::move(s);
    return true;
  }
  return false;
}

Dataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema,
                     LoadStats* stats) {
  DatasetReader reader(path, schema);
  Dataset ds;
  ds.sequence_length = schema.sequence_length;
  Sample s;
  while (reader.next(s)) ds.samples.push_back(std::move(s));
  ds.item_vocab_size = schema.items ? schema.items->size() : reader.max_item_index() + 1;
  ds.category_vocab_size =
      schema.categories ? schema.categories->size() : reader.max_category_index() + 1;
  if (stats) *stats = reader.stats();
  return ds;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write dataset " + path.string());
  std::string history;
  const BehaviorSequence* last = nullptr;
  for (const Sample& s : dataset.samples) {
    if (s.history.get() != last) {
      last = s.history.get();
      history.clear();
      if (last) {
        for (std::size_t i = last->length(); i-- > 0;) {
          if (!last->mask[i]) continue;
          const Behavior& b = last->slots[i];
          if (!history.empty()) history += ',';
          history += std::to_string(b.item) + ':' + std::to_string(b.category) + ':' +
                     std::to_string(b.timestamp);
        }
      }
    }
    out << s.user_id << '\t' << s.target.item << '\t' << s.target.category << '\t'
        << s.label << '\t';
    if (s.exposed_item) out << *s.exposed_item;
    out << '\t' << history << '\n';
  }
  if (!out) throw ConfigError("failed writing dataset " + path.string());
}

void validate(const SyntheticSpec& spec) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("synthetic spec: " + what);
  };
  auto probability = [](double p) { return p >= 0.0 && p <= 1.0; };
  need(spec.users > 0, "users must be positive");
  need(spec.categories >= 2, "need at least two categories");
  need(spec.items >= spec.categories, "need at least one item per category");
  need(spec.clusters_per_user >= 1, "clusters_per_user must be >= 1");
  need(spec.clusters_per_user + 3 < spec.categories,
       "clusters_per_user exceeds the categories available (clusters + 3 >= categories)");
  need(spec.sequence_length > 0, "sequence_length must be positive");
  need(probability(spec.phase_share), "phase_share must be a probability");
  need(probability(spec.linked_targets), "linked_targets must be a probability");
  need(probability(spec.linked_in_cluster), "linked_in_cluster must be a probability");
  need(probability(spec.niche_targets), "niche_targets must be a probability");
  need(probability(spec.niche_in_cluster), "niche_in_cluster must be a probability");
  need(probability(spec.promoted_targets), "promoted_targets must be a probability");
  need(probability(spec.promoted_in_cluster), "promoted_in_cluster must be a probability");
  need(spec.linked_targets + spec.niche_targets + spec.promoted_targets <= 1.0 + 1e-12,
       "linked, niche and promoted target shares must sum to at most 1");
  need(probability(spec.in_cluster_targets), "in_cluster_targets must be a probability");
  need(spec.p_lo >= 0 && spec.p_hi <= 1 && spec.p_lo < spec.p_hi,
       "click probabilities need 0 <= p_lo < p_hi <= 1");
  need(spec.p_promoted_hi >= spec.p_lo && spec.p_promoted_hi <= 1,
       "p_promoted_hi must lie in [p_lo, 1]");
}

SyntheticSpec planted_interest_spec() {
  SyntheticSpec spec;
  spec.users = 5000;
  spec.linked_targets = 0.35;
  spec.linked_in_cluster = 0.3;
  spec.niche_targets = 0.15;
  spec.niche_in_cluster = 0.65;
  spec.promoted_targets = 0.45;
  spec.p_promoted_hi = 0.15;
  spec.p_hi = 0.95;
  spec.p_lo = 0.05;
  return spec;
}

std::uint32_t synthetic_category(const SyntheticSpec& spec, std::uint32_t item) {
  const std::size_t per = spec.items / spec.categories;
  return static_cast<std::uint32_t>(std::min((item - 1) / per, spec.categories - 1) + 1);
}

namespace {

std::uint32_t random_item_in(const SyntheticSpec& spec, std::uint32_t category, Rng& rng) {
  const std::size_t per = spec.items / spec.categories;
  const std::size_t first = (category - 1) * per + 1;
  const std::size_t last = category == spec.categories ? spec.items : first + per - 1;
  return static_cast<std::uint32_t>(first + rng.below(last - first + 1));
}

std::uint32_t random_category(const SyntheticSpec& spec, Rng& rng) {
  return static_cast<std::uint32_t>(1 + rng.below(spec.categories));
}

}  // namespace

std::vector<std::uint32_t> synthetic_links(const SyntheticSpec& spec) {
  validate(spec);
  Rng rng = Rng::derive(spec.seed, 0);
  std::vector<std::uint32_t> cycle(spec.categories);
  std::iota(cycle.begin(), cycle.end(), 1u);
  rng.shuffle(std::span(cycle));
  std::vector<std::uint32_t> link(spec.categories + 1, 0);
  for (std::size_t i = 0; i < cycle.size(); ++i) link[cycle[i]] = cycle[(i + 1) % cycle.size()];
  return link;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  const std::vector<std::uint32_t> link = synthetic_links(spec);
  SyntheticData out;
  out.item_vocab_size = spec.items + 1;
  out.category_vocab_size = spec.categories + 1;
  out.sequence_length = spec.sequence_length;
  out.impressions.reserve(spec.users * spec.impressions_per_user);

  for (std::size_t u = 0; u < spec.users; ++u) {
    Rng rng = Rng::derive(spec.seed, u + 1);
    const std::uint32_t now = random_category(spec, rng);
    const std::uint32_t linked = link[now];
    const std::uint32_t niche = link[linked];
    const std::uint32_t promoted = link[niche];
    const bool linked_in = rng.bernoulli(spec.linked_in_cluster);
    const bool niche_in = rng.bernoulli(spec.niche_in_cluster);
    const bool promoted_in = rng.bernoulli(spec.promoted_in_cluster);

    // Earlier phases in random order, c_now last.
    std::vector<std::uint32_t> phases;
    auto room = [&] { return phases.size() + 1 < spec.clusters_per_user; };
    if (linked_in && room()) phases.push_back(linked);
    if (spec.niche_targets > 0 && niche_in && room()) phases.push_back(niche);
    if (spec.promoted_targets > 0 && promoted_in && room()) phases.push_back(promoted);
    auto related = [&](std::uint32_t c) {
      return c == now || c == linked || c == niche || c == promoted;
    };
    while (room()) {
      const std::uint32_t c = random_category(spec, rng);
      if (related(c) || std::find(phases.begin(), phases.end(), c) != phases.end()) continue;
      phases.push_back(c);
    }
    rng.shuffle(std::span(phases));
    phases.push_back(now);
    auto in_clusters = [&](std::uint32_t c) {
      return std::find(phases.begin(), phases.end(), c) != phases.end();
    };

    const std::size_t history_len =
        spec.sequence_length - rng.below(std::max<std::size_t>(spec.sequence_length / 5, 1));
    std::vector<Behavior> behaviors;
    behaviors.reserve(history_len);
    std::int64_t ts = 1'600'000'000 + static_cast<std::int64_t>(rng.below(86'400));
    for (std::size_t i = 0; i < history_len; ++i) {
      ts += 1 + static_cast<std::int64_t>(rng.below(3600));
      const std::uint32_t category = rng.bernoulli(spec.phase_share)
                                         ? phases[i * phases.size() / history_len]
                                         : random_category(spec, rng);
      behaviors.push_back({random_item_in(spec, category, rng), category, ts});
    }
    auto history = std::make_shared<const BehaviorSequence>(
        make_sequence(std::move(behaviors), spec.sequence_length));

    for (std::size_t k = 0; k < spec.impressions_per_user; ++k) {
      std::uint32_t category;
      bool promoted_role = false;
      const double role = rng.uniform();
      if (role < spec.linked_targets) {
        category = linked;
      } else if (role < spec.linked_targets + spec.niche_targets) {
        category = niche;
      } else if (role < spec.linked_targets + spec.niche_targets + spec.promoted_targets) {
        category = promoted;
        promoted_role = true;
      } else if (rng.bernoulli(spec.in_cluster_targets)) {
        category = phases[rng.below(phases.size())];
      } else {
        do {
          category = random_category(spec, rng);
        } while (in_clusters(category));
      }
      const bool inside = in_clusters(category);
      Sample s;
      s.user_id = u + 1;
      s.history = history;
      s.target = {random_item_in(spec, category, rng), category, ts + 1};
      const double p_inside = promoted_role ? spec.p_promoted_hi : spec.p_hi;
      s.label = rng.bernoulli(inside ? p_inside : spec.p_lo) ? 1 : 0;
      if (spec.log_exposures) s.exposed_item = s.target.item;
      out.impressions.push_back(std::move(s));
      out.in_cluster.push_back(inside ? 1 : 0);
      out.current_cluster.push_back(now);
    }
  }
  return out;
}

}  // namespace genli::data
