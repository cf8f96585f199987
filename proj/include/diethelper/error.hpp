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

#include <stdexcept>
#include <string>
#include <string_view>

namespace diethelper {

// Every failure the library reports carries one of these codes. The API layer
// maps each code to exactly one HTTP status and wire identifier.
enum class Errc {
  empty_transcript,
  no_text_found,
  adapter_unavailable,
  seed_parse,
  seed_validation,
  validation,
  diet_not_found,
  unauthenticated,
  unauthorized,
  email_taken,
  weak_password,
  invalid_credentials,
  already_chosen,
  not_chosen,
  empty_ingredient,
  duplicate_ingredient,
  not_present,
  user_not_found,
  storage,
};

/// Stable snake_case identifier, e.g. "no_text_found".
std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace diethelper
