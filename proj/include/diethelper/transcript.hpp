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
#include <span>
#include <string>
#include <vector>

namespace diethelper {

// One snippet of OCR output, kept verbatim.
struct TextFragment {
  std::string text;

  friend bool operator==(const TextFragment&, const TextFragment&) = default;
};

// The comma-joined label text. `normalized` is always the lowercase of `raw`.
struct Transcript {
  std::string raw;
  std::string normalized;

  /// Wraps text that was already extracted elsewhere (CLI/API raw input).
  static Transcript from_raw(std::string raw);
};

struct IngredientToken {
  std::size_t index = 0;
  std::string text;

  friend bool operator==(const IngredientToken&,
                         const IngredientToken&) = default;
};

/// Appends a comma after every fragment, in order, then lowercases. An
/// embedded comma inside a fragment yields extra segments downstream.
Transcript join_fragments(std::span<const TextFragment> fragments);

/// Splits the normalized text on commas, trims each segment and drops empty
/// ones. Throws Error(Errc::empty_transcript) if nothing remains.
std::vector<IngredientToken> tokenize(const Transcript& transcript);

}  // namespace diethelper
