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

#include "diethelper/catalog.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "diethelper/error.hpp"
#include "diethelper/store.hpp"
#include "diethelper/text.hpp"

namespace diethelper {

namespace {

constexpr std::string_view kDietCollection = "diets";
constexpr std::string_view kMetaCollection = "meta";
constexpr std::string_view kCatalogMetaKey = "catalog";

bool is_reserved_name(std::string_view name) {
  return text::to_lower(name) == text::to_lower(kCustomDietName);
}

void require_admin(Role caller) {
  if (caller != Role::admin) {
    throw Error(Errc::unauthorized, "diet catalog changes require an administrator");
  }
}

}  // namespace

void to_json(nlohmann::json& j, const Diet& d) {
  j = nlohmann::json{{"name", d.name},
                     {"description", d.description},
                     {"forbidden_ingredients", d.forbidden_ingredients}};
}

void from_json(const nlohmann::json& j, Diet& d) {
  j.at("name").get_to(d.name);
  d.description = j.value("description", std::string{});
  d.forbidden_ingredients =
      j.value("forbidden_ingredients", std::vector<std::string>{});
}

Diet normalize_diet(Diet diet) {
  diet.name = text::trim(diet.name);
  if (diet.name.empty()) {
    throw Error(Errc::validation, "diet name must not be empty");
  }
  if (is_reserved_name(diet.name)) {
    throw Error(Errc::validation,
                "diet name \"" + diet.name + "\" is reserved for custom ingredients");
  }
  std::set<std::string, std::less<>> seen;
  for (auto& ingredient : diet.forbidden_ingredients) {
    ingredient = text::normalize_ingredient(ingredient);
    if (ingredient.empty()) {
      throw Error(Errc::validation,
                  "diet \"" + diet.name + "\" has an empty forbidden ingredient");
    }
    if (ingredient.find(',') != std::string::npos) {
      throw Error(Errc::validation, "diet \"" + diet.name + "\" ingredient \"" +
                                        ingredient + "\" contains a comma");
    }
    if (!seen.insert(ingredient).second) {
      throw Error(Errc::validation, "diet \"" + diet.name +
                                        "\" lists \"" + ingredient + "\" twice");
    }
  }
  return diet;
}

const Diet* CatalogSnapshot::find(std::string_view name) const {
  auto it = diets.find(name);
  return it == diets.end() ? nullptr : &it->second;
}

Catalog::Catalog()
    : write_mutex_(std::make_unique<std::mutex>()),
      snapshot_mutex_(std::make_unique<std::mutex>()),
      current_(std::make_shared<CatalogSnapshot>()) {}

Catalog::Catalog(std::shared_ptr<DocumentStore> store) : Catalog() {
  store_ = std::move(store);
  if (!store_) return;
  auto snap = std::make_shared<CatalogSnapshot>();
  for (const auto& key : store_->keys(kDietCollection)) {
    auto doc = store_->get(kDietCollection, key);
    if (!doc) continue;
    try {
      auto diet = normalize_diet(doc->get<Diet>());
      snap->diets.emplace(diet.name, std::move(diet));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::storage, "corrupt diet document \"" + key + "\": " + e.what());
    }
  }
  if (auto meta = store_->get(kMetaCollection, kCatalogMetaKey)) {
    snap->version = meta->value("version", std::uint64_t{0});
  }
  current_ = std::move(snap);
}

Catalog::Catalog(Catalog&& other) noexcept
    : store_(std::move(other.store_)),
      write_mutex_(std::move(other.write_mutex_)),
      snapshot_mutex_(std::move(other.snapshot_mutex_)),
      current_(std::move(other.current_)) {}

Catalog& Catalog::operator=(Catalog&& other) noexcept {
  store_ = std::move(other.store_);
  write_mutex_ = std::move(other.write_mutex_);
  snapshot_mutex_ = std::move(other.snapshot_mutex_);
  current_ = std::move(other.current_);
  return *this;
}

std::shared_ptr<const CatalogSnapshot> Catalog::snapshot() const {
  std::lock_guard lock(*snapshot_mutex_);
  return current_;
}

void Catalog::publish(std::shared_ptr<const CatalogSnapshot> next) {
  if (store_) {
    store_->put(kMetaCollection, kCatalogMetaKey,
                nlohmann::json{{"version", next->version}});
  }
  std::lock_guard lock(*snapshot_mutex_);
  current_ = std::move(next);
}

Diet Catalog::get_diet(std::string_view name) const {
  auto snap = snapshot();
  if (const Diet* d = snap->find(name)) return *d;
  throw Error(Errc::diet_not_found, "no diet named \"" + std::string(name) + "\"");
}

bool Catalog::contains(std::string_view name) const {
  return snapshot()->find(name) != nullptr;
}

std::vector<DietSummary> Catalog::list_diets() const {
  auto snap = snapshot();
  std::vector<DietSummary> out;
  out.reserve(snap->diets.size());
  for (const auto& [name, diet] : snap->diets) {
    out.push_back({name, diet.description, diet.forbidden_ingredients.size()});
  }
  return out;
}

std::uint64_t Catalog::version() const { return snapshot()->version; }

std::size_t Catalog::size() const { return snapshot()->diets.size(); }

std::uint64_t Catalog::upsert_diet(Diet diet, Role caller) {
  require_admin(caller);
  diet = normalize_diet(std::move(diet));
  std::lock_guard lock(*write_mutex_);
  auto next = std::make_shared<CatalogSnapshot>(*snapshot());
  ++next->version;
  if (store_) store_->put(kDietCollection, diet.name, diet);
  next->diets.insert_or_assign(diet.name, std::move(diet));
  const auto version = next->version;
  publish(std::move(next));
  return version;
}

std::uint64_t Catalog::delete_diet(std::string_view name, Role caller) {
  require_admin(caller);
  std::lock_guard lock(*write_mutex_);
  auto next = std::make_shared<CatalogSnapshot>(*snapshot());
  auto it = next->diets.find(name);
  if (it == next->diets.end()) {
    throw Error(Errc::diet_not_found, "no diet named \"" + std::string(name) + "\"");
  }
  next->diets.erase(it);
  ++next->version;
  if (store_) store_->erase(kDietCollection, name);
  const auto version = next->version;
  publish(std::move(next));
  return version;
}

std::uint64_t Catalog::apply_seed(std::span<const Diet> diets) {
  std::vector<Diet> normalized;
  normalized.reserve(diets.size());
  for (const auto& d : diets) normalized.push_back(normalize_diet(d));
  std::lock_guard lock(*write_mutex_);
  auto next = std::make_shared<CatalogSnapshot>(*snapshot());
  ++next->version;
  for (auto& diet : normalized) {
    if (store_) store_->put(kDietCollection, diet.name, diet);
    next->diets.insert_or_assign(diet.name, std::move(diet));
  }
  const auto version = next->version;
  publish(std::move(next));
  return version;
}

std::vector<Diet> parse_seed(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::seed_parse, std::string("seed file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("diets") || !doc["diets"].is_array()) {
    throw Error(Errc::seed_parse, "seed file must be an object with a \"diets\" array");
  }

  std::vector<Diet> diets;
  std::set<std::string, std::less<>> names;
  std::size_t position = 0;
  for (const auto& entry : doc["diets"]) {
    ++position;
    Diet diet;
    try {
      if (!entry.is_object() || !entry.contains("name") ||
          !entry["name"].is_string()) {
        throw Error(Errc::seed_parse, "seed entry #" + std::to_string(position) +
                                          " has no string \"name\"");
      }
      diet.name = entry["name"].get<std::string>();
      diet.description = entry.value("description", std::string{});
      if (!entry.contains("forbidden_ingredients") ||
          !entry["forbidden_ingredients"].is_array()) {
        throw Error(Errc::seed_parse, "seed entry \"" + diet.name +
                                          "\" has no \"forbidden_ingredients\" array");
      }
      diet.forbidden_ingredients =
          entry["forbidden_ingredients"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::seed_parse, "seed entry #" + std::to_string(position) +
                                        " is malformed: " + e.what());
    }
    try {
      diet = normalize_diet(std::move(diet));
    } catch (const Error& e) {
      throw Error(Errc::seed_validation, e.what());
    }
    if (!names.insert(diet.name).second) {
      throw Error(Errc::seed_validation,
                  "duplicate diet name \"" + diet.name + "\" in seed file");
    }
    diets.push_back(std::move(diet));
  }
  return diets;
}

std::vector<Diet> read_seed_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::seed_parse, "cannot open seed file " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_seed(buf.str());
}

Catalog load_seed(const std::filesystem::path& path) {
  const auto diets = read_seed_file(path);
  Catalog catalog;
  catalog.apply_seed(diets);
  return catalog;
}

}  // namespace diethelper
