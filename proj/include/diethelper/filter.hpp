// Copyright 2026 The Diet Helper Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "diethelper/capture.hpp"
#include "diethelper/transcript.hpp"

namespace diethelper {

class Catalog;
struct CatalogSnapshot;
struct UserProfile;

struct DietRule {
  std::string diet;
  std::vector<std::string> needles;

  friend bool operator==(const DietRule&, const DietRule&) = default;
};

// One forbidden ingredient found inside a token, with every active diet
// that forbids it (rule order).
struct NeedleMatch {
  std::string needle;
  std::vector<std::string> diets;

  friend bool operator==(const NeedleMatch&, const NeedleMatch&) = default;
};

struct Violation {
  std::size_t token_index = 0;
  std::string token_text;
  /// Ordered by the needle's first appearance across the rules.
  std::vector<NeedleMatch> matches;

  friend bool operator==(const Violation&, const Violation&) = default;
};

enum class Verdict { compliant, violations_found };

struct FilterResult {
  Verdict verdict = Verdict::compliant;
  std::vector<Violation> violations;
  std::vector<std::string> violated_diets;
  std::vector<IngredientToken> tokens;

  friend bool operator==(const FilterResult&, const FilterResult&) = default;
};

std::string_view verdict_name(Verdict v) noexcept;

nlohmann::ordered_json to_json(const FilterResult& result);
/// Canonical structured form: two-space indented JSON plus a newline. Equal
/// results always serialize to identical bytes.
std::string to_structured(const FilterResult& result);

/// One rule per chosen diet present in the catalog (unknown names are
/// skipped), in chosen order, then exactly one "Custom" rule holding the
/// user's own ingredients, even when that list is empty.
std::vector<DietRule> collect_rules(std::span<const std::string> chosen_diets,
                                    std::span<const std::string> custom_ingredients,
                                    const CatalogSnapshot& catalog);
std::vector<DietRule> collect_rules(const UserProfile& profile,
                                    const Catalog& catalog);

// Aho-Corasick automaton over the distinct needles of a rule set. Immutable
// once built; share it freely between threads.
class Matcher {
 public:
  explicit Matcher(std::span<const DietRule> rules);

  /// Ids of every needle that occurs in `haystack`, ascending. Ids follow
  /// first appearance in rule order, then needle order.
  std::vector<std::uint32_t> find(std::string_view haystack) const;

  const std::string& needle(std::uint32_t id) const { return needles_[id]; }
  std::size_t needle_count() const { return needles_.size(); }
  std::size_t state_count() const { return fail_.size(); }

  FilterResult filter(std::span<const IngredientToken> tokens) const;

 private:
  struct Edge {
    unsigned char byte;
    std::uint32_t target;
  };

  std::uint32_t step(std::uint32_t state, unsigned char byte) const;

  std::vector<std::string> needles_;
  std::vector<std::vector<std::uint32_t>> needle_rules_;
  std::vector<std::string> rule_diets_;

  // State s owns edges_[base_[s] .. base_[s + 1]) sorted by byte; the root
  // uses the dense root_next_ table instead.
  std::vector<std::uint32_t> base_;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> root_next_;
  std::vector<std::uint32_t> fail_;
  // Needle ending exactly here, or kNone.
  std::vector<std::uint32_t> output_;
  // Nearest proper suffix state with an output, or kNone.
  std::vector<std::uint32_t> dict_link_;
};

Matcher build_matcher(std::span<const DietRule> rules);

/// Automaton-backed filtering.
FilterResult filter_tokens(std::span<const IngredientToken> tokens,
                           std::span<const DietRule> rules);

/// Reference backend: the token x rule x needle loop with substring tests,
/// reporting every matching needle. Used by the benchmark as ground truth.
FilterResult filter_tokens_naive(std::span<const IngredientToken> tokens,
                                 std::span<const DietRule> rules);

// Caches built matchers by (catalog version, user, profile revision).
class MatcherCache {
 public:
  explicit MatcherCache(std::size_t capacity = 1024) : capacity_(capacity) {}

  std::shared_ptr<const Matcher> get(std::uint64_t catalog_version,
                                     const UserProfile& profile,
                                     std::span<const DietRule> rules);
  std::size_t size() const;

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const Matcher>> entries_;
};

/// Full pipeline: capture, join, tokenize, collect rules, filter. Propagates
/// Errc::no_text_found, Errc::empty_transcript and adapter errors.
FilterResult check_label(const CaptureRequest& request, const UserProfile& profile,
                         const Catalog& catalog, const OcrAdapter* adapter = nullptr,
                         MatcherCache* cache = nullptr);

/// Byte ranges [begin, end) of `token` covered by any of `needles`, merged
/// and sorted. Used for highlighting.
std::vector<std::pair<std::size_t, std::size_t>> highlight_spans(
    std::string_view token, std::span<const std::string> needles);

}  // namespace diethelper
