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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "genli/data.hpp"
#include "genli/errors.hpp"

namespace fs = std::filesystem;
using namespace genli;
using namespace genli::data;

namespace {

fs::path temp_file(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "genli_data_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::trunc) << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("short histories are padded at the tail") {
  auto seq = make_sequence({{1, 1, 10}, {2, 1, 30}, {3, 2, 20}}, 5);
  CHECK(seq.length() == 5);
  CHECK(seq.mask == std::vector<std::uint8_t>{1, 1, 1, 0, 0});
  CHECK(seq.slots[0].item == 2);
  CHECK(seq.slots[1].item == 3);
  CHECK(seq.slots[2].item == 1);
  CHECK(seq.slots[3].is_padding());
}

TEST_CASE("long histories keep the most recent behaviors") {
  std::vector<Behavior> bs;
  for (std::uint32_t i = 1; i <= 7; ++i) bs.push_back({i, 1, static_cast<std::int64_t>(i * 100)});
  auto seq = make_sequence(bs, 5);
  CHECK(seq.valid_count() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(seq.slots[i].item == 7 - i);
}

TEST_CASE("reader parses records and shares per-user histories") {
  auto path = temp_file("small.tsv");
  write_text(path,
             "1\t5\t2\t1\t\t3:1:100,4:2:200\n"
             "1\t6\t3\t0\t-\t3:1:100,4:2:200\n"
             "2\t7\t3\t1\t9\t8:3:50\n");
  DatasetSchema schema;
  schema.sequence_length = 4;
  LoadStats stats;
  Dataset ds = load_dataset(path, schema, &stats);
  REQUIRE(ds.samples.size() == 3);
  CHECK(stats.lines == 3);
  CHECK(ds.samples[0].history.get() == ds.samples[1].history.get());
  CHECK(ds.samples[0].history->slots[0].item == 4);
  CHECK(ds.samples[0].history->mask == std::vector<std::uint8_t>{1, 1, 0, 0});
  CHECK_FALSE(ds.samples[0].exposed_item);
  CHECK(ds.samples[2].exposed_item == 9u);
  CHECK(ds.item_vocab_size == 10);
  CHECK(ds.category_vocab_size == 4);
}

TEST_CASE("malformed lines name the line number") {
  auto path = temp_file("bad.tsv");
  write_text(path, "1\t5\t2\t1\t\t3:1:100\n1\t5\t2\t7\t\t3:1:100\n");
  DatasetSchema schema;
  try {
    load_dataset(path, schema);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  write_text(path, "1\t5\t2\t1\t\t3:1\n");
  CHECK_THROWS_AS(load_dataset(path, schema), DataError);
  CHECK_THROWS_AS(load_dataset(temp_file("missing.tsv"), schema), DataError);
}

TEST_CASE("unknown vocabulary values map to padding and are counted") {
  auto vocab_path = temp_file("items.vocab");
  write_text(vocab_path, "apple\t1\npear\t2\n");
  auto cat_path = temp_file("cats.vocab");
  write_text(cat_path, "fruit\t1\n");
  auto path = temp_file("raw.tsv");
  write_text(path, "1\tapple\tfruit\t1\t\tpear:fruit:1,kiwi:veg:2\n");
  DatasetSchema schema;
  schema.sequence_length = 3;
  schema.items = Vocabulary::load(vocab_path);
  schema.categories = Vocabulary::load(cat_path);
  LoadStats stats;
  Dataset ds = load_dataset(path, schema, &stats);
  CHECK(stats.unknown_items == 1);
  CHECK(stats.unknown_categories == 1);
  CHECK(ds.samples[0].target.item == 1);
  // The unknown behavior becomes padding and is dropped from the mask.
  CHECK(ds.samples[0].history->valid_count() == 1);
  CHECK(ds.item_vocab_size == 3);
}

TEST_CASE("surrogate exposed item prefers the target's category") {
  Sample s;
  s.history = std::make_shared<const BehaviorSequence>(
      make_sequence({{10, 1, 3}, {11, 2, 2}, {12, 2, 1}}, 4));
  s.target = {99, 2, 4};
  CHECK(exposed_or_surrogate(s) == 11);
  s.target.category = 7;
  CHECK(exposed_or_surrogate(s) == 10);
  s.exposed_item = 42;
  CHECK(exposed_or_surrogate(s) == 42);
  Sample empty;
  empty.history = std::make_shared<const BehaviorSequence>(make_sequence({}, 3));
  CHECK_THROWS_AS(exposed_or_surrogate(empty), DataError);
}

TEST_CASE("write then load reproduces the generated samples") {
  SyntheticSpec spec;
  spec.users = 30;
  spec.sequence_length = 40;
  spec.impressions_per_user = 4;
  SyntheticData syn = generate_synthetic(spec);
  Dataset ds{syn.impressions, syn.item_vocab_size, syn.category_vocab_size, 40};
  auto path = temp_file("roundtrip.tsv");
  write_dataset(ds, path);
  DatasetSchema schema;
  schema.sequence_length = 40;
  Dataset back = load_dataset(path, schema);
  REQUIRE(back.samples.size() == ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const Sample& a = ds.samples[i];
    const Sample& b = back.samples[i];
    CHECK(a.user_id == b.user_id);
    CHECK(a.target.item == b.target.item);
    CHECK(a.target.category == b.target.category);
    CHECK(a.label == b.label);
    CHECK(a.exposed_item == b.exposed_item);
    CHECK(*a.history == *b.history);
  }
}

TEST_CASE("synthetic click rates follow the planted probabilities") {
  SyntheticSpec spec;
  spec.users = 5000;
  spec.sequence_length = 20;
  spec.impressions_per_user = 20;  // 10^5 impressions
  SyntheticData syn = generate_synthetic(spec);
  REQUIRE(syn.impressions.size() == 100000);
  double clicks_in = 0, n_in = 0, clicks_out = 0, n_out = 0;
  for (std::size_t i = 0; i < syn.impressions.size(); ++i) {
    const int y = syn.impressions[i].label;
    if (syn.in_cluster[i]) {
      clicks_in += y;
      ++n_in;
    } else {
      clicks_out += y;
      ++n_out;
    }
  }
  CHECK(std::abs(clicks_in / n_in - spec.p_hi) < 0.02);
  CHECK(std::abs(clicks_out / n_out - spec.p_lo) < 0.02);
}

TEST_CASE("synthetic histories are mostly made of the user's clusters") {
  SyntheticSpec spec;
  spec.users = 50;
  SyntheticData syn = generate_synthetic(spec);
  for (const Sample& s : syn.impressions) {
    const auto& seq = *s.history;
    CHECK(seq.length() == spec.sequence_length);
    CHECK(seq.valid_count() >= spec.sequence_length * 4 / 5);
    for (std::size_t i = 0; i < seq.length(); ++i) {
      if (!seq.mask[i]) continue;
      CHECK(synthetic_category(spec, seq.slots[i].item) == seq.slots[i].category);
      if (i + 1 < seq.length() && seq.mask[i + 1]) {
        CHECK(seq.slots[i].timestamp > seq.slots[i + 1].timestamp);
      }
    }
  }
}

TEST_CASE("synthetic users drift towards their current cluster") {
  SyntheticSpec spec;
  spec.users = 200;
  spec.impressions_per_user = 1;
  SyntheticData syn = generate_synthetic(spec);
  double recent_now = 0, recent = 0;
  for (std::size_t i = 0; i < syn.impressions.size(); ++i) {
    const auto& seq = *syn.impressions[i].history;
    for (std::size_t j = 0; j < 10; ++j) {
      recent += 1;
      recent_now += seq.slots[j].category == syn.current_cluster[i];
    }
  }
  // Only noise behaviors leave the current cluster at the head of the
  // sequence.
  CHECK(recent_now / recent == doctest::Approx(spec.phase_share).epsilon(0.05));
}

TEST_CASE("linked categories form one cycle and steer the impressions") {
  SyntheticSpec spec;
  spec.users = 2000;
  spec.sequence_length = 50;
  spec.impressions_per_user = 10;
  const auto link = synthetic_links(spec);
  REQUIRE(link.size() == spec.categories + 1);
  std::vector<bool> seen(spec.categories + 1, false);
  std::uint32_t c = 1;
  for (std::size_t i = 0; i < spec.categories; ++i) {
    CHECK(link[c] != c);
    CHECK(!seen[c]);
    seen[c] = true;
    c = link[c];
  }
  CHECK(c == 1);

  SyntheticData syn = generate_synthetic(spec);
  double linked = 0, linked_inside = 0;
  for (std::size_t i = 0; i < syn.impressions.size(); ++i) {
    const Sample& s = syn.impressions[i];
    CHECK(s.exposed_item == s.target.item);
    if (s.target.category != link[syn.current_cluster[i]]) continue;
    linked += 1;
    linked_inside += syn.in_cluster[i];
  }
  const double n = static_cast<double>(syn.impressions.size());
  // Linked targets plus the random in-cluster and outside draws that happen
  // to land on link(c_now).
  CHECK(linked / n > spec.linked_targets);
  CHECK(linked / n < spec.linked_targets + 0.05);
  CHECK(linked_inside / linked == doctest::Approx(spec.linked_in_cluster).epsilon(0.1));
}

TEST_CASE("promoted items dominate exposures while linked items dominate clicks") {
  SyntheticSpec spec;
  spec.users = 2000;
  spec.sequence_length = 50;
  spec.impressions_per_user = 10;
  spec.linked_targets = 0.3;
  spec.niche_targets = 0.15;
  spec.promoted_targets = 0.35;
  const auto link = synthetic_links(spec);
  SyntheticData syn = generate_synthetic(spec);
  // Per role: exposures, clicks, and impressions inside a user cluster.
  double shown[3] = {}, clicked[3] = {}, inside[3] = {};
  for (std::size_t i = 0; i < syn.impressions.size(); ++i) {
    const std::uint32_t linked = link[syn.current_cluster[i]];
    const std::uint32_t roles[3] = {linked, link[linked], link[link[linked]]};
    for (int r = 0; r < 3; ++r) {
      if (syn.impressions[i].target.category != roles[r]) continue;
      shown[r] += 1;
      clicked[r] += syn.impressions[i].label;
      inside[r] += syn.in_cluster[i];
    }
  }
  const double n = static_cast<double>(syn.impressions.size());
  CHECK(shown[1] / n == doctest::Approx(spec.niche_targets).epsilon(0.15));
  CHECK(shown[2] / n == doctest::Approx(spec.promoted_targets).epsilon(0.1));
  CHECK(inside[1] / shown[1] == doctest::Approx(spec.niche_in_cluster).epsilon(0.1));
  CHECK(inside[2] / shown[2] == doctest::Approx(spec.promoted_in_cluster).epsilon(0.1));
  // Exposure order promoted > linked > niche, click order linked > promoted,
  // click-through order niche > linked > promoted.
  CHECK(shown[2] > shown[0]);
  CHECK(shown[0] > shown[1]);
  CHECK(clicked[0] > clicked[2]);
  CHECK(clicked[1] / shown[1] > clicked[0] / shown[0]);
  CHECK(clicked[0] / shown[0] > clicked[2] / shown[2]);
}

TEST_CASE("same seed yields identical files") {
  SyntheticSpec spec;
  spec.users = 40;
  spec.sequence_length = 30;
  auto write = [&](const std::string& name) {
    SyntheticData syn = generate_synthetic(spec);
    Dataset ds{syn.impressions, syn.item_vocab_size, syn.category_vocab_size, 30};
    auto p = temp_file(name);
    write_dataset(ds, p);
    return read_text(p);
  };
  const std::string first = write("a.tsv");
  CHECK(first == write("b.tsv"));
  spec.seed += 1;
  CHECK(write("c.tsv") != first);
}

TEST_CASE("infeasible synthetic specs are configuration errors") {
  SyntheticSpec spec;
  spec.clusters_per_user = spec.categories + 1;
  CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  spec = {};
  spec.p_lo = 0.95;
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = {};
  spec.linked_targets = 1.5;
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = {};
  spec.linked_targets = 0.6;
  spec.promoted_targets = 0.6;
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = {};
  spec.categories = 1;
  CHECK_THROWS_AS(validate(spec), ConfigError);
}
