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

#include "diethelper/text.hpp"

#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace diethelper::text {

namespace {

icu::UnicodeString from_utf8(std::string_view s) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

bool is_ascii(std::string_view s) {
  for (unsigned char c : s) {
    if (c >= 0x80) return false;
  }
  return true;
}

bool is_ascii_space(char c) {
  // Same set as u_isWhitespace() restricted to ASCII.
  return c == ' ' || (c >= '\t' && c <= '\r') || (c >= '\x1c' && c <= '\x1f');
}

}  // namespace

std::string to_lower(std::string_view utf8) {
  if (is_ascii(utf8)) {
    std::string out(utf8);
    for (char& c : out) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
  }
  auto u = from_utf8(utf8);
  u.toLower(icu::Locale::getRoot());
  return to_utf8(u);
}

std::string trim(std::string_view utf8) {
  if (is_ascii(utf8)) {
    std::size_t b = 0, e = utf8.size();
    while (b < e && is_ascii_space(utf8[b])) ++b;
    while (e > b && is_ascii_space(utf8[e - 1])) --e;
    return std::string(utf8.substr(b, e - b));
  }
  auto u = from_utf8(utf8);
  u.trim();
  return to_utf8(u);
}

std::string normalize_ingredient(std::string_view utf8) {
  return to_lower(trim(utf8));
}

bool is_normalized_ingredient(std::string_view utf8) {
  return !utf8.empty() && normalize_ingredient(utf8) == utf8;
}

bool has_uppercase(std::string_view utf8) {
  std::int32_t i = 0;
  const auto len = static_cast<std::int32_t>(utf8.size());
  const auto* p = reinterpret_cast<const std::uint8_t*>(utf8.data());
  while (i < len) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    if (c >= 0 && u_isUUppercase(c)) return true;
  }
  return false;
}

}  // namespace diethelper::text
