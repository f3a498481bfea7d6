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

#include "genli/brm.hpp"

#include "genli/errors.hpp"

namespace genli {

const char* to_string(InterestKind kind) {
  switch (kind) {
    case InterestKind::kImplicit:
      return "implicit";
    case InterestKind::kExplicit:
      return "explicit";
    case InterestKind::kRelative:
      return "relative";
  }
  return "unknown";
}

RetrievalResult retrieve_all(const data::BehaviorSequence& seq, std::span<const double> p_implicit,
                             std::span<const double> p_explicit,
                             std::span<const double> p_relative, std::size_t k) {
  if (p_implicit.size() != p_explicit.size() || p_implicit.size() != p_relative.size()) {
    throw ConfigError("retrieve_all: distributions have different sizes");
  }
  RetrievalResult r;
  r[InterestKind::kImplicit] = retrieve_topk(seq, p_implicit, k);
  r[InterestKind::kExplicit] = retrieve_topk(seq, p_explicit, k);
  r[InterestKind::kRelative] = retrieve_topk(seq, p_relative, k);
  return r;
}

}  // namespace genli
