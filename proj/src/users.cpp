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

#include "diethelper/users.hpp"

#include <algorithm>
#include <stdexcept>

#include <sodium.h>

#include "diethelper/catalog.hpp"
#include "diethelper/error.hpp"
#include "diethelper/store.hpp"
#include "diethelper/text.hpp"

namespace diethelper {

namespace {

constexpr std::string_view kUserCollection = "users";
constexpr std::string_view kCredentialCollection = "credentials";

void ensure_sodium() {
  if (sodium_init() < 0) {
    throw std::runtime_error("libsodium failed to initialize");
  }
}

std::string random_hex(std::size_t bytes) {
  std::vector<unsigned char> buf(bytes);
  randombytes_buf(buf.data(), buf.size());
  std::string hex(bytes * 2 + 1, '\0');
  sodium_bin2hex(hex.data(), hex.size(), buf.data(), buf.size());
  hex.pop_back();
  return hex;
}

void authorize(const Session& session, std::string_view uid) {
  if (session.uid != uid && session.role != Role::admin) {
    throw Error(Errc::unauthorized, "cannot access another user's profile");
  }
}

void require_admin(const Session& session) {
  if (session.role != Role::admin) {
    throw Error(Errc::unauthorized, "administrator role required");
  }
}

Role parse_role(std::string_view s) {
  return s == "admin" ? Role::admin : Role::member;
}

}  // namespace

struct UserDirectory::Record {
  std::mutex write_mutex;
  mutable std::mutex doc_mutex;
  std::shared_ptr<const UserProfile> doc;
  std::string password_hash;
  Role role = Role::member;

  std::shared_ptr<const UserProfile> load() const {
    std::lock_guard lock(doc_mutex);
    return doc;
  }
  void store(std::shared_ptr<const UserProfile> next) {
    std::lock_guard lock(doc_mutex);
    doc = std::move(next);
  }
};

void to_json(nlohmann::json& j, const UserProfile& p) {
  j = nlohmann::json{{"uid", p.uid},
                     {"name", p.name},
                     {"email", p.email},
                     {"chosen_diets", p.chosen_diets},
                     {"custom_unwanted_ingredients", p.custom_unwanted_ingredients},
                     {"revision", p.revision}};
}

void from_json(const nlohmann::json& j, UserProfile& p) {
  j.at("uid").get_to(p.uid);
  p.name = j.value("name", std::string{});
  j.at("email").get_to(p.email);
  p.chosen_diets = j.value("chosen_diets", std::vector<std::string>{});
  p.custom_unwanted_ingredients =
      j.value("custom_unwanted_ingredients", std::vector<std::string>{});
  p.revision = j.value("revision", std::uint64_t{0});
}

std::string normalize_email(std::string_view email) {
  auto out = text::to_lower(text::trim(email));
  const auto at = out.find('@');
  if (at == std::string::npos || at == 0 || at + 1 == out.size()) {
    throw Error(Errc::validation, "\"" + out + "\" is not an email address");
  }
  return out;
}

std::string normalize_custom_ingredient(std::string_view text) {
  auto out = text::normalize_ingredient(text);
  if (out.empty()) {
    throw Error(Errc::empty_ingredient, "ingredient must not be empty");
  }
  if (out.find(',') != std::string::npos) {
    throw Error(Errc::validation,
                "ingredient \"" + out + "\" contains a comma; add each ingredient separately");
  }
  return out;
}

UserDirectory::UserDirectory(UserDirectoryOptions options,
                             std::shared_ptr<DocumentStore> store)
    : options_(std::move(options)), store_(std::move(store)) {
  ensure_sodium();
  dummy_hash_ = hash_password(random_hex(16));
  if (!store_) return;
  for (const auto& uid : store_->keys(kCredentialCollection)) {
    auto cred = store_->get(kCredentialCollection, uid);
    auto doc = store_->get(kUserCollection, uid);
    if (!cred || !doc) continue;
    try {
      auto record = std::make_shared<Record>();
      record->password_hash = cred->at("password_hash").get<std::string>();
      record->role = parse_role(cred->value("role", std::string("member")));
      auto profile = std::make_shared<UserProfile>(doc->get<UserProfile>());
      uid_by_email_.emplace(profile->email, profile->uid);
      record->doc = std::move(profile);
      users_.emplace(uid, std::move(record));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::storage, "corrupt user document \"" + uid + "\": " + e.what());
    }
  }
}

UserDirectory::~UserDirectory() = default;

std::string UserDirectory::hash_password(std::string_view password) const {
  const bool minimum = options_.hash_cost == HashCost::minimum;
  const auto ops = minimum ? crypto_pwhash_scryptsalsa208sha256_OPSLIMIT_MIN
                           : crypto_pwhash_scryptsalsa208sha256_OPSLIMIT_INTERACTIVE;
  const auto mem = minimum ? crypto_pwhash_scryptsalsa208sha256_MEMLIMIT_MIN
                           : crypto_pwhash_scryptsalsa208sha256_MEMLIMIT_INTERACTIVE;
  char out[crypto_pwhash_scryptsalsa208sha256_STRBYTES];
  if (crypto_pwhash_scryptsalsa208sha256_str(out, password.data(),
                                             password.size(), ops, mem) != 0) {
    throw std::runtime_error("password hashing ran out of memory");
  }
  return std::string(out);
}

std::shared_ptr<UserDirectory::Record> UserDirectory::find_record(
    std::string_view uid) const {
  std::shared_lock lock(users_mutex_);
  auto it = users_.find(uid);
  if (it == users_.end()) {
    throw Error(Errc::user_not_found, "no user with uid \"" + std::string(uid) + "\"");
  }
  return it->second;
}

void UserDirectory::persist(const Record& record,
                            const UserProfile& profile) const {
  if (!store_) return;
  store_->put(kUserCollection, profile.uid, profile);
  store_->put(kCredentialCollection, profile.uid,
              nlohmann::json{{"email", profile.email},
                             {"password_hash", record.password_hash},
                             {"role", role_name(record.role)}});
}

UserProfile UserDirectory::create_user(std::string_view name,
                                       std::string_view email,
                                       std::string_view password, Role role) {
  auto display = text::trim(name);
  if (display.empty()) {
    throw Error(Errc::validation, "name must not be empty");
  }
  auto address = normalize_email(email);
  if (password.size() < kMinPasswordLength) {
    throw Error(Errc::weak_password, "password must be at least " +
                                         std::to_string(kMinPasswordLength) +
                                         " characters");
  }
  {
    std::shared_lock lock(users_mutex_);
    if (uid_by_email_.count(address)) {
      throw Error(Errc::email_taken, "email \"" + address + "\" is already registered");
    }
  }
  auto record = std::make_shared<Record>();
  record->password_hash = hash_password(password);
  record->role = role;
  auto profile = std::make_shared<UserProfile>();
  profile->uid = random_hex(16);
  profile->name = std::move(display);
  profile->email = address;

  std::unique_lock lock(users_mutex_);
  if (uid_by_email_.count(address)) {
    throw Error(Errc::email_taken, "email \"" + address + "\" is already registered");
  }
  persist(*record, *profile);
  record->doc = profile;
  uid_by_email_.emplace(address, profile->uid);
  users_.emplace(profile->uid, std::move(record));
  return *profile;
}

UserProfile UserDirectory::register_user(std::string_view name,
                                         std::string_view email,
                                         std::string_view password) {
  return create_user(name, email, password, Role::member);
}

UserProfile UserDirectory::bootstrap_admin(std::string_view name,
                                           std::string_view email,
                                           std::string_view password) {
  const auto address = normalize_email(email);
  std::shared_ptr<Record> existing;
  {
    std::shared_lock lock(users_mutex_);
    if (auto it = uid_by_email_.find(address); it != uid_by_email_.end()) {
      existing = users_.at(it->second);
    }
  }
  if (!existing) return create_user(name, email, password, Role::admin);
  std::lock_guard write(existing->write_mutex);
  existing->role = Role::admin;
  auto profile = existing->load();
  persist(*existing, *profile);
  return *profile;
}

Session UserDirectory::issue_session(const std::string& uid, Role role) {
  Session s{random_hex(32), uid, role, options_.clock() + options_.session_ttl};
  std::lock_guard lock(sessions_mutex_);
  sessions_.emplace(s.token, s);
  return s;
}

Session UserDirectory::authenticate(std::string_view email,
                                    std::string_view password) {
  std::string address;
  std::shared_ptr<Record> record;
  try {
    address = normalize_email(email);
  } catch (const Error&) {
  }
  {
    std::shared_lock lock(users_mutex_);
    if (auto it = uid_by_email_.find(address); it != uid_by_email_.end()) {
      record = users_.at(it->second);
    }
  }
  // Unknown accounts are still checked against a hash so both failure paths
  // cost the same.
  const std::string& hash = record ? record->password_hash : dummy_hash_;
  const bool ok = crypto_pwhash_scryptsalsa208sha256_str_verify(
                      hash.c_str(), password.data(), password.size()) == 0;
  if (!record || !ok) {
    throw Error(Errc::invalid_credentials, "invalid email or password");
  }
  return issue_session(record->load()->uid, record->role);
}

Session UserDirectory::validate(std::string_view token) const {
  Session s;
  {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(token);
    if (it == sessions_.end()) {
      throw Error(Errc::unauthenticated, "missing or unknown session token");
    }
    if (options_.clock() >= it->second.expiry) {
      sessions_.erase(it);
      throw Error(Errc::unauthenticated, "session expired; log in again");
    }
    s = it->second;
  }
  return s;
}

void UserDirectory::logout(std::string_view token) {
  std::lock_guard lock(sessions_mutex_);
  if (auto it = sessions_.find(token); it != sessions_.end()) sessions_.erase(it);
}

UserProfile UserDirectory::get_profile(const Session& session,
                                       std::string_view uid) const {
  authorize(session, uid);
  return *find_record(uid)->load();
}

UserProfile UserDirectory::mutate(const Session& session, std::string_view uid,
                                  const std::function<void(UserProfile&)>& change) {
  authorize(session, uid);
  auto record = find_record(uid);
  std::lock_guard write(record->write_mutex);
  auto next = std::make_shared<UserProfile>(*record->load());
  change(*next);
  ++next->revision;
  persist(*record, *next);
  record->store(next);
  return *next;
}

UserProfile UserDirectory::rename(const Session& session, std::string_view uid,
                                  std::string_view new_name) {
  auto display = text::trim(new_name);
  if (display.empty()) throw Error(Errc::validation, "name must not be empty");
  return mutate(session, uid, [&](UserProfile& p) { p.name = display; });
}

UserProfile UserDirectory::choose_diet(const Session& session,
                                       std::string_view uid,
                                       std::string_view diet_name,
                                       const Catalog& catalog) {
  if (!catalog.contains(diet_name)) {
    throw Error(Errc::diet_not_found, "no diet named \"" + std::string(diet_name) + "\"");
  }
  return mutate(session, uid, [&](UserProfile& p) {
    if (std::find(p.chosen_diets.begin(), p.chosen_diets.end(), diet_name) !=
        p.chosen_diets.end()) {
      throw Error(Errc::already_chosen,
                  "diet \"" + std::string(diet_name) + "\" is already chosen");
    }
    p.chosen_diets.emplace_back(diet_name);
  });
}

UserProfile UserDirectory::remove_diet(const Session& session,
                                       std::string_view uid,
                                       std::string_view diet_name) {
  return mutate(session, uid, [&](UserProfile& p) {
    auto it = std::find(p.chosen_diets.begin(), p.chosen_diets.end(), diet_name);
    if (it == p.chosen_diets.end()) {
      throw Error(Errc::not_chosen,
                  "diet \"" + std::string(diet_name) + "\" is not chosen");
    }
    p.chosen_diets.erase(it);
  });
}

UserProfile UserDirectory::add_custom_ingredient(const Session& session,
                                                 std::string_view uid,
                                                 std::string_view text) {
  auto ingredient = normalize_custom_ingredient(text);
  return mutate(session, uid, [&](UserProfile& p) {
    auto& list = p.custom_unwanted_ingredients;
    if (std::find(list.begin(), list.end(), ingredient) != list.end()) {
      throw Error(Errc::duplicate_ingredient,
                  "\"" + ingredient + "\" is already in the list");
    }
    list.push_back(ingredient);
  });
}

UserProfile UserDirectory::remove_custom_ingredient(const Session& session,
                                                    std::string_view uid,
                                                    std::string_view text) {
  const auto ingredient = text::normalize_ingredient(text);
  return mutate(session, uid, [&](UserProfile& p) {
    auto& list = p.custom_unwanted_ingredients;
    auto it = std::find(list.begin(), list.end(), ingredient);
    if (it == list.end()) {
      throw Error(Errc::not_present, "\"" + ingredient + "\" is not in the list");
    }
    list.erase(it);
  });
}

std::vector<UserProfile> UserDirectory::list_users(const Session& session) const {
  require_admin(session);
  std::vector<UserProfile> out;
  std::shared_lock lock(users_mutex_);
  out.reserve(users_.size());
  for (const auto& [_, record] : users_) out.push_back(*record->load());
  return out;
}

void UserDirectory::admin_delete_user(const Session& session,
                                      std::string_view uid) {
  require_admin(session);
  {
    std::unique_lock lock(users_mutex_);
    auto it = users_.find(uid);
    if (it == users_.end()) {
      throw Error(Errc::user_not_found, "no user with uid \"" + std::string(uid) + "\"");
    }
    auto record = it->second;
    std::lock_guard write(record->write_mutex);
    uid_by_email_.erase(record->load()->email);
    users_.erase(it);
    if (store_) {
      store_->erase(kUserCollection, uid);
      store_->erase(kCredentialCollection, uid);
    }
  }
  std::lock_guard lock(sessions_mutex_);
  std::erase_if(sessions_, [&](const auto& kv) { return kv.second.uid == uid; });
}

std::size_t UserDirectory::size() const {
  std::shared_lock lock(users_mutex_);
  return users_.size();
}

}  // namespace diethelper
