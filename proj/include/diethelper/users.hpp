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

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "diethelper/role.hpp"

namespace diethelper {

class Catalog;
class DocumentStore;

struct UserProfile {
  std::string uid;
  std::string name;
  std::string email;
  std::vector<std::string> chosen_diets;
  std::vector<std::string> custom_unwanted_ingredients;
  /// Bumped on every mutation of this document.
  std::uint64_t revision = 0;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

void to_json(nlohmann::json& j, const UserProfile& p);
void from_json(const nlohmann::json& j, UserProfile& p);

using Clock = std::chrono::system_clock;

struct Session {
  std::string token;
  std::string uid;
  Role role = Role::member;
  Clock::time_point expiry;
};

inline constexpr std::size_t kMinPasswordLength = 8;

// scrypt cost. `interactive` is the production setting; `minimum` exists so
// test suites can register many users quickly.
enum class HashCost { interactive, minimum };

struct UserDirectoryOptions {
  std::chrono::seconds session_ttl{std::chrono::hours(24)};
  HashCost hash_cost = HashCost::interactive;
  std::function<Clock::time_point()> clock = [] { return Clock::now(); };
};

/// Lowercased and trimmed; throws Error(Errc::validation) if it has no '@'.
std::string normalize_email(std::string_view email);

/// The stored form of a custom ingredient. Throws Error(Errc::empty_ingredient)
/// or, for embedded commas, Error(Errc::validation).
std::string normalize_custom_ingredient(std::string_view text);

// Registered users, their credentials and live sessions. Each profile is one
// document; a mutation copies it, applies the change and swaps it in, so a
// reader always sees either the old or the new document.
class UserDirectory {
 public:
  explicit UserDirectory(UserDirectoryOptions options = {},
                         std::shared_ptr<DocumentStore> store = nullptr);
  ~UserDirectory();

  UserDirectory(const UserDirectory&) = delete;
  UserDirectory& operator=(const UserDirectory&) = delete;

  UserProfile register_user(std::string_view name, std::string_view email,
                            std::string_view password);
  /// Creates the administrator account if the email is unknown, otherwise
  /// promotes the existing account. The password is only used on creation.
  UserProfile bootstrap_admin(std::string_view name, std::string_view email,
                              std::string_view password);

  /// Unknown email and wrong password both give Errc::invalid_credentials.
  Session authenticate(std::string_view email, std::string_view password);
  /// Throws Error(Errc::unauthenticated) for unknown or expired tokens.
  Session validate(std::string_view token) const;
  void logout(std::string_view token);

  UserProfile get_profile(const Session& session, std::string_view uid) const;
  UserProfile rename(const Session& session, std::string_view uid,
                     std::string_view new_name);
  UserProfile choose_diet(const Session& session, std::string_view uid,
                          std::string_view diet_name, const Catalog& catalog);
  UserProfile remove_diet(const Session& session, std::string_view uid,
                          std::string_view diet_name);
  UserProfile add_custom_ingredient(const Session& session, std::string_view uid,
                                    std::string_view text);
  UserProfile remove_custom_ingredient(const Session& session,
                                       std::string_view uid,
                                       std::string_view text);

  std::vector<UserProfile> list_users(const Session& session) const;
  void admin_delete_user(const Session& session, std::string_view uid);

  std::size_t size() const;

 private:
  struct Record;

  std::shared_ptr<Record> find_record(std::string_view uid) const;
  UserProfile create_user(std::string_view name, std::string_view email,
                          std::string_view password, Role role);
  UserProfile mutate(const Session& session, std::string_view uid,
                     const std::function<void(UserProfile&)>& change);
  void persist(const Record& record, const UserProfile& profile) const;
  std::string hash_password(std::string_view password) const;
  Session issue_session(const std::string& uid, Role role);

  UserDirectoryOptions options_;
  std::shared_ptr<DocumentStore> store_;
  std::string dummy_hash_;

  mutable std::shared_mutex users_mutex_;
  std::map<std::string, std::shared_ptr<Record>, std::less<>> users_;
  std::map<std::string, std::string, std::less<>> uid_by_email_;

  mutable std::mutex sessions_mutex_;
  mutable std::map<std::string, Session, std::less<>> sessions_;
};

}  // namespace diethelper
