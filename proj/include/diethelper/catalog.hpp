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

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "diethelper/role.hpp"

namespace diethelper {

class DocumentStore;

/// Name of the pseudo-diet that holds a user's own unwanted ingredients. No
/// catalog diet may use it (compared case-insensitively).
inline constexpr std::string_view kCustomDietName = "Custom";

struct Diet {
  std::string name;
  std::string description;
  std::vector<std::string> forbidden_ingredients;

  friend bool operator==(const Diet&, const Diet&) = default;
};

void to_json(nlohmann::json& j, const Diet& d);
void from_json(const nlohmann::json& j, Diet& d);

struct DietSummary {
  std::string name;
  std::string description;
  std::size_t ingredient_count = 0;
};

/// Trims the name, normalizes every ingredient and checks the diet
/// invariants: non-empty name that is not "Custom", non-empty ingredients
/// without commas, no duplicates. Throws Error(Errc::validation).
Diet normalize_diet(Diet diet);

// Immutable view of the catalog at one version.
struct CatalogSnapshot {
  std::map<std::string, Diet, std::less<>> diets;
  std::uint64_t version = 0;

  const Diet* find(std::string_view name) const;
};

// Diets keyed by name. Reads return whole documents from an immutable
// snapshot; mutations are serialized and bump the version by one.
class Catalog {
 public:
  Catalog();
  /// Loads whatever the store already holds and writes through on mutation.
  explicit Catalog(std::shared_ptr<DocumentStore> store);

  Catalog(Catalog&& other) noexcept;
  Catalog& operator=(Catalog&& other) noexcept;
  Catalog(const Catalog&) = delete;
  Catalog& operator=(const Catalog&) = delete;

  std::shared_ptr<const CatalogSnapshot> snapshot() const;

  /// Throws Error(Errc::diet_not_found).
  Diet get_diet(std::string_view name) const;
  bool contains(std::string_view name) const;
  /// Sorted by name.
  std::vector<DietSummary> list_diets() const;
  std::uint64_t version() const;
  std::size_t size() const;

  /// Inserts or fully replaces by name. Requires Role::admin.
  std::uint64_t upsert_diet(Diet diet, Role caller);
  /// Requires Role::admin. Throws Error(Errc::diet_not_found).
  std::uint64_t delete_diet(std::string_view name, Role caller);
  /// Upserts every seed diet as one mutation. Diets not in the seed are kept.
  std::uint64_t apply_seed(std::span<const Diet> diets);

 private:
  void publish(std::shared_ptr<const CatalogSnapshot> next);

  std::shared_ptr<DocumentStore> store_;
  std::unique_ptr<std::mutex> write_mutex_;
  std::unique_ptr<std::mutex> snapshot_mutex_;
  std::shared_ptr<const CatalogSnapshot> current_;
};

/// Parses and validates a seed document. Throws Error(Errc::seed_parse) for
/// malformed input and Error(Errc::seed_validation) naming the offending
/// entry otherwise.
std::vector<Diet> parse_seed(std::string_view json_text);
std::vector<Diet> read_seed_file(const std::filesystem::path& path);

/// A fresh in-memory catalog holding exactly the diets in the seed file.
Catalog load_seed(const std::filesystem::path& path);

}  // namespace diethelper
