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

#include "diethelper/transcript.hpp"

#include <string_view>

#include "diethelper/error.hpp"
#include "diethelper/text.hpp"

namespace diethelper {

Transcript Transcript::from_raw(std::string raw) {
  Transcript t;
  t.normalized = text::to_lower(raw);
  t.raw = std::move(raw);
  return t;
}

Transcript join_fragments(std::span<const TextFragment> fragments) {
  std::string raw;
  for (const auto& f : fragments) {
    raw += f.text;
    raw += ',';
  }
  return Transcript::from_raw(std::move(raw));
}

std::vector<IngredientToken> tokenize(const Transcript& transcript) {
  std::vector<IngredientToken> tokens;
  std::string_view rest = transcript.normalized;
  while (true) {
    const auto comma = rest.find(',');
    auto segment = text::trim(rest.substr(0, comma));
    if (!segment.empty()) {
      tokens.push_back({tokens.size(), std::move(segment)});
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (tokens.empty()) {
    throw Error(Errc::empty_transcript,
                "no ingredients could be read from the label; retake the photo");
  }
  return tokens;
}

}  // namespace diethelper
