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

#include "diethelper/filter.hpp"

#include <algorithm>

#include "diethelper/catalog.hpp"
#include "diethelper/users.hpp"

namespace diethelper {

namespace {

template <typename T>
void push_unique(std::vector<T>& list, const T& value) {
  if (std::find(list.begin(), list.end(), value) == list.end()) list.push_back(value);
}

}  // namespace

std::string_view verdict_name(Verdict v) noexcept {
  return v == Verdict::compliant ? "compliant" : "violations_found";
}

nlohmann::ordered_json to_json(const FilterResult& result) {
  nlohmann::ordered_json j;
  j["verdict"] = verdict_name(result.verdict);
  auto& tokens = j["tokens"] = nlohmann::ordered_json::array();
  for (const auto& t : result.tokens) {
    tokens.push_back({{"index", t.index}, {"text", t.text}});
  }
  auto& violations = j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : result.violations) {
    auto matches = nlohmann::ordered_json::array();
    for (const auto& m : v.matches) {
      matches.push_back({{"needle", m.needle}, {"diets", m.diets}});
    }
    violations.push_back({{"token_index", v.token_index},
                          {"token_text", v.token_text},
                          {"matches", std::move(matches)}});
  }
  j["violated_diets"] = result.violated_diets;
  return j;
}

std::string to_structured(const FilterResult& result) {
  return to_json(result).dump(2) + "\n";
}

std::vector<DietRule> collect_rules(std::span<const std::string> chosen_diets,
                                    std::span<const std::string> custom_ingredients,
                                    const CatalogSnapshot& catalog) {
  std::vector<DietRule> rules;
  rules.reserve(chosen_diets.size() + 1);
  for (const auto& name : chosen_diets) {
    if (const Diet* diet = catalog.find(name)) {
      rules.push_back({diet->name, diet->forbidden_ingredients});
    }
  }
  rules.push_back({std::string(kCustomDietName),
                   {custom_ingredients.begin(), custom_ingredients.end()}});
  return rules;
}

std::vector<DietRule> collect_rules(const UserProfile& profile,
                                    const Catalog& catalog) {
  return collect_rules(profile.chosen_diets, profile.custom_unwanted_ingredients,
                       *catalog.snapshot());
}

FilterResult filter_tokens(std::span<const IngredientToken> tokens,
                           std::span<const DietRule> rules) {
  return Matcher(rules).filter(tokens);
}

FilterResult filter_tokens_naive(std::span<const IngredientToken> tokens,
                                 std::span<const DietRule> rules) {
  FilterResult result;
  result.tokens.assign(tokens.begin(), tokens.end());
  for (const auto& token : tokens) {
    Violation v{token.index, token.text, {}};
    std::vector<std::string> token_diets;
    for (const auto& rule : rules) {
      for (const auto& needle : rule.needles) {
        if (needle.empty() || token.text.find(needle) == std::string::npos) continue;
        auto it = std::find_if(v.matches.begin(), v.matches.end(),
                               [&](const NeedleMatch& m) { return m.needle == needle; });
        if (it == v.matches.end()) {
          v.matches.push_back({needle, {}});
          it = std::prev(v.matches.end());
        }
        push_unique(it->diets, rule.diet);
        push_unique(token_diets, rule.diet);
      }
    }
    if (v.matches.empty()) continue;
    for (const auto& d : token_diets) push_unique(result.violated_diets, d);
    result.violations.push_back(std::move(v));
  }
  result.verdict =
      result.violations.empty() ? Verdict::compliant : Verdict::violations_found;
  return result;
}

std::shared_ptr<const Matcher> MatcherCache::get(std::uint64_t catalog_version,
                                                 const UserProfile& profile,
                                                 std::span<const DietRule> rules) {
  if (profile.uid.empty()) return std::make_shared<const Matcher>(rules);
  auto key = std::to_string(catalog_version) + '/' + profile.uid + '/' +
             std::to_string(profile.revision);
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto matcher = std::make_shared<const Matcher>(rules);
  std::lock_guard lock(mutex_);
  if (entries_.size() >= capacity_) entries_.clear();
  entries_.emplace(std::move(key), matcher);
  return matcher;
}

std::size_t MatcherCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

FilterResult check_label(const CaptureRequest& request, const UserProfile& profile,
                         const Catalog& catalog, const OcrAdapter* adapter,
                         MatcherCache* cache) {
  const auto captured = extract_fragments(request, adapter);
  const auto tokens = tokenize(join_fragments(captured.fragments));
  const auto snapshot = catalog.snapshot();
  const auto rules = collect_rules(profile.chosen_diets,
                                   profile.custom_unwanted_ingredients, *snapshot);
  if (cache != nullptr) {
    return cache->get(snapshot->version, profile, rules)->filter(tokens);
  }
  return Matcher(rules).filter(tokens);
}

std::vector<std::pair<std::size_t, std::size_t>> highlight_spans(
    std::string_view token, std::span<const std::string> needles) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& needle : needles) {
    if (needle.empty()) continue;
    for (auto pos = token.find(needle); pos != std::string_view::npos;
         pos = token.find(needle, pos + 1)) {
      spans.emplace_back(pos, pos + needle.size());
    }
  }
  std::sort(spans.begin(), spans.end());
  std::vector<std::pair<std::size_t, std::size_t>> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && s.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, s.second);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

}  // namespace diethelper
