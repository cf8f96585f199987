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

#include <string>
#include <string_view>

// UTF-8 helpers shared by label tokenization and rule normalization. Invalid
// UTF-8 sequences are replaced with U+FFFD.
namespace diethelper::text {

/// Full Unicode lowercase mapping using root-locale rules.
std::string to_lower(std::string_view utf8);

/// Strips leading and trailing Unicode whitespace.
std::string trim(std::string_view utf8);

/// trim() followed by to_lower(). This is the canonical form of a forbidden
/// ingredient, a custom ingredient and an ingredient token.
std::string normalize_ingredient(std::string_view utf8);

bool is_normalized_ingredient(std::string_view utf8);

/// True if any code point has the Unicode Uppercase property.
bool has_uppercase(std::string_view utf8);

}  // namespace diethelper::text
