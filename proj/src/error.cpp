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

#include "diethelper/error.hpp"

namespace diethelper {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::empty_transcript: return "empty_transcript";
    case Errc::no_text_found: return "no_text_found";
    case Errc::adapter_unavailable: return "adapter_unavailable";
    case Errc::seed_parse: return "seed_parse_error";
    case Errc::seed_validation: return "seed_validation_error";
    case Errc::validation: return "validation_error";
    case Errc::diet_not_found: return "diet_not_found";
    case Errc::unauthenticated: return "unauthenticated";
    case Errc::unauthorized: return "unauthorized";
    case Errc::email_taken: return "email_taken";
    case Errc::weak_password: return "weak_password";
    case Errc::invalid_credentials: return "invalid_credentials";
    case Errc::already_chosen: return "already_chosen";
    case Errc::not_chosen: return "not_chosen";
    case Errc::empty_ingredient: return "empty_ingredient";
    case Errc::duplicate_ingredient: return "duplicate_ingredient";
    case Errc::not_present: return "not_present";
    case Errc::user_not_found: return "user_not_found";
    case Errc::storage: return "storage_error";
  }
  return "unknown";
}

}  // namespace diethelper
