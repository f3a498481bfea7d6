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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "genli/data.hpp"

namespace genli {

// Position used for padding entries of a selection.
inline constexpr std::size_t kPaddingPosition = std::numeric_limits<std::size_t>::max();

struct Selection {
  // Positions into the newest-first sequence, best first.
  std::vector<std::size_t> positions;
  std::vector<double> scores;

  std::size_t valid_count() const {
    return static_cast<std::size_t>(
        std::count_if(positions.begin(), positions.end(),
                      [](std::size_t p) { return p != kPaddingPosition; }));
  }
};

// Higher score wins; equal scores go to the lower position, which is the
// more recent behavior in a newest-first sequence.
inline bool ranks_before(double score_a, std::size_t pos_a, double score_b, std::size_t pos_b) {
  return score_a > score_b || (score_a == score_b && pos_a < pos_b);
}

// Single pass with a bounded heap whose top is the weakest kept entry.
// Invalid positions are never selected; missing slots are padded.
template <typename ScoreFn>
Selection select_topk(std::size_t length, std::span<const std::uint8_t> mask, std::size_t k,
                      ScoreFn&& score) {
  struct Entry {
    double score;
    std::size_t pos;
  };
  const auto weaker_on_top = [](const Entry& a, const Entry& b) {
    return ranks_before(a.score, a.pos, b.score, b.pos);
  };
  std::vector<Entry> heap;
  heap.reserve(k);
  for (std::size_t i = 0; i < length; ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double s = static_cast<double>(score(i));
    if (heap.size() < k) {
      heap.push_back({s, i});
      std::push_heap(heap.begin(), heap.end(), weaker_on_top);
    } else if (k > 0 && ranks_before(s, i, heap.front().score, heap.front().pos)) {
      std::pop_heap(heap.begin(), heap.end(), weaker_on_top);
      heap.back() = {s, i};
      std::push_heap(heap.begin(), heap.end(), weaker_on_top);
    }
  }
  std::sort_heap(heap.begin(), heap.end(), weaker_on_top);
  Selection out;
  out.positions.reserve(k);
  out.scores.reserve(k);
  for (const Entry& e : heap) {
    out.positions.push_back(e.pos);
    out.scores.push_back(e.score);
  }
  while (out.positions.size() < k) {
    out.positions.push_back(kPaddingPosition);
    out.scores.push_back(0.0);
  }
  return out;
}

// Distribution slot of a behavior id: id mod N (a mask when N is a power of two).
inline std::size_t lookup_slot(std::uint32_t id, std::size_t n) {
  return (n & (n - 1)) == 0 ? (id & (n - 1)) : (id % n);
}

template <typename T>
T lookup_score(std::uint32_t id, std::span<const T> p) {
  return p[lookup_slot(id, p.size())];
}

template <typename T>
Selection retrieve_topk(const data::BehaviorSequence& seq, std::span<const T> p,
                        std::size_t k) {
  const std::size_t n = p.size();
  const data::Behavior* slots = seq.slots.data();
  const T* probs = p.data();
  if ((n & (n - 1)) == 0) {
    const std::size_t m = n - 1;
    return select_topk(seq.length(), seq.mask, k,
                       [&](std::size_t i) { return probs[slots[i].item & m]; });
  }
  return select_topk(seq.length(), seq.mask, k,
                     [&](std::size_t i) { return probs[slots[i].item % n]; });
}

enum class InterestKind { kImplicit = 0, kExplicit = 1, kRelative = 2 };
inline constexpr std::size_t kInterestKinds = 3;
const char* to_string(InterestKind kind);

struct RetrievalResult {
  // Indexed by InterestKind.
  Selection kinds[kInterestKinds];

  const Selection& operator[](InterestKind k) const { return kinds[static_cast<int>(k)]; }
  Selection& operator[](InterestKind k) { return kinds[static_cast<int>(k)]; }
  std::size_t total() const {
    return kinds[0].positions.size() + kinds[1].positions.size() + kinds[2].positions.size();
  }
};

// Three independent selections; overlap across kinds is kept. ConfigError
// when the distributions differ in size.
RetrievalResult retrieve_all(const data::BehaviorSequence& seq, std::span<const double> p_implicit,
                             std::span<const double> p_explicit,
                             std::span<const double> p_relative, std::size_t k);

}  // namespace genli
