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

#include <algorithm>
#include <deque>
#include <limits>
#include <unordered_map>

#include "diethelper/filter.hpp"

namespace diethelper {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint32_t kRoot = 0;
// Below this fan-out a linear scan beats binary search.
constexpr std::size_t kLinearScanLimit = 8;

}  // namespace

Matcher::Matcher(std::span<const DietRule> rules) {
  rule_diets_.reserve(rules.size());
  std::unordered_map<std::string_view, std::uint32_t> ids;
  for (std::uint32_t r = 0; r < rules.size(); ++r) {
    rule_diets_.push_back(rules[r].diet);
    for (const auto& needle : rules[r].needles) {
      if (needle.empty()) continue;
      auto [it, inserted] =
          ids.try_emplace(needle, static_cast<std::uint32_t>(needles_.size()));
      if (inserted) {
        needles_.push_back(needle);
        needle_rules_.emplace_back();
      }
      auto& owners = needle_rules_[it->second];
      if (owners.empty() || owners.back() != r) owners.push_back(r);
    }
  }
  // `ids` views into `rules`, so it stays valid while needles_ grows.

  // Trie with unsorted child lists; the root gets a dense table.
  std::vector<std::vector<Edge>> children(1);
  root_next_.assign(256, kRoot);
  output_.assign(1, kNone);
  auto child = [&](std::uint32_t state, unsigned char c) -> std::uint32_t {
    if (state == kRoot) return root_next_[c];
    for (const auto& e : children[state]) {
      if (e.byte == c) return e.target;
    }
    return kRoot;
  };
  for (std::uint32_t id = 0; id < needles_.size(); ++id) {
    std::uint32_t state = kRoot;
    for (unsigned char c : needles_[id]) {
      auto next = child(state, c);
      if (next == kRoot) {
        next = static_cast<std::uint32_t>(children.size());
        children.emplace_back();
        output_.push_back(kNone);
        if (state == kRoot) {
          root_next_[c] = next;
        } else {
          children[state].push_back({c, next});
        }
      }
      state = next;
    }
    output_[state] = id;
  }
  for (auto& list : children) {
    std::sort(list.begin(), list.end(),
              [](const Edge& a, const Edge& b) { return a.byte < b.byte; });
  }

  const auto n = children.size();
  base_.assign(n + 1, 0);
  for (std::size_t s = 0; s < n; ++s) {
    base_[s + 1] = base_[s] + static_cast<std::uint32_t>(children[s].size());
  }
  edges_.reserve(base_[n]);
  for (const auto& list : children) edges_.insert(edges_.end(), list.begin(), list.end());

  // Breadth-first failure and dictionary links.
  fail_.assign(n, kRoot);
  dict_link_.assign(n, kNone);
  std::deque<std::uint32_t> queue;
  for (unsigned c = 0; c < 256; ++c) {
    if (root_next_[c] != kRoot) queue.push_back(root_next_[c]);
  }
  while (!queue.empty()) {
    const auto s = queue.front();
    queue.pop_front();
    for (const auto& e : children[s]) {
      auto f = fail_[s];
      while (f != kRoot && child(f, e.byte) == kRoot) f = fail_[f];
      fail_[e.target] = child(f, e.byte);
      const auto fl = fail_[e.target];
      dict_link_[e.target] = output_[fl] != kNone ? fl : dict_link_[fl];
      queue.push_back(e.target);
    }
  }
}

std::uint32_t Matcher::step(std::uint32_t state, unsigned char byte) const {
  while (state != kRoot) {
    const auto* first = edges_.data() + base_[state];
    const auto* last = edges_.data() + base_[state + 1];
    const Edge* hit = nullptr;
    if (static_cast<std::size_t>(last - first) <= kLinearScanLimit) {
      for (auto* e = first; e != last; ++e) {
        if (e->byte == byte) {
          hit = e;
          break;
        }
      }
    } else {
      auto* e = std::lower_bound(first, last, byte, [](const Edge& edge, unsigned char b) {
        return edge.byte < b;
      });
      if (e != last && e->byte == byte) hit = e;
    }
    if (hit) return hit->target;
    state = fail_[state];
  }
  return root_next_[byte];
}

std::vector<std::uint32_t> Matcher::find(std::string_view haystack) const {
  std::vector<std::uint32_t> found;
  std::uint32_t state = kRoot;
  for (unsigned char c : haystack) {
    state = step(state, c);
    for (auto s = output_[state] != kNone ? state : dict_link_[state]; s != kNone;
         s = dict_link_[s]) {
      found.push_back(output_[s]);
    }
  }
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  return found;
}

FilterResult Matcher::filter(std::span<const IngredientToken> tokens) const {
  FilterResult result;
  result.tokens.assign(tokens.begin(), tokens.end());
  std::vector<std::uint32_t> token_rules;
  for (const auto& token : tokens) {
    const auto ids = find(token.text);
    if (ids.empty()) continue;
    Violation v{token.index, token.text, {}};
    token_rules.clear();
    for (auto id : ids) {
      NeedleMatch m{needles_[id], {}};
      for (auto r : needle_rules_[id]) {
        if (std::find(m.diets.begin(), m.diets.end(), rule_diets_[r]) == m.diets.end()) {
          m.diets.push_back(rule_diets_[r]);
        }
        token_rules.push_back(r);
      }
      v.matches.push_back(std::move(m));
    }
    std::sort(token_rules.begin(), token_rules.end());
    token_rules.erase(std::unique(token_rules.begin(), token_rules.end()),
                      token_rules.end());
    for (auto r : token_rules) {
      auto& diets = result.violated_diets;
      if (std::find(diets.begin(), diets.end(), rule_diets_[r]) == diets.end()) {
        diets.push_back(rule_diets_[r]);
      }
    }
    result.violations.push_back(std::move(v));
  }
  result.verdict =
      result.violations.empty() ? Verdict::compliant : Verdict::violations_found;
  return result;
}

Matcher build_matcher(std::span<const DietRule> rules) { return Matcher(rules); }

}  // namespace diethelper
