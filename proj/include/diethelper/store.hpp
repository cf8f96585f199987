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

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace diethelper {

// Keyed document persistence. A document is read and written whole; there is
// no partial projection.
class DocumentStore {
 public:
  virtual ~DocumentStore() = default;

  virtual std::optional<nlohmann::json> get(std::string_view collection,
                                            std::string_view key) const = 0;
  virtual void put(std::string_view collection, std::string_view key,
                   const nlohmann::json& document) = 0;
  /// Returns false if the document did not exist.
  virtual bool erase(std::string_view collection, std::string_view key) = 0;
  /// Keys in lexicographic order.
  virtual std::vector<std::string> keys(std::string_view collection) const = 0;
};

class MemoryStore final : public DocumentStore {
 public:
  std::optional<nlohmann::json> get(std::string_view collection,
                                    std::string_view key) const override;
  void put(std::string_view collection, std::string_view key,
           const nlohmann::json& document) override;
  bool erase(std::string_view collection, std::string_view key) override;
  std::vector<std::string> keys(std::string_view collection) const override;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::map<std::string, nlohmann::json>, std::less<>>
      collections_;
};

// Layout: <root>/<collection>/<percent-encoded key>.json. Writes go to a
// temporary file that is renamed over the target, so readers never see a
// partially written document.
class DirectoryStore final : public DocumentStore {
 public:
  explicit DirectoryStore(std::filesystem::path root);

  std::optional<nlohmann::json> get(std::string_view collection,
                                    std::string_view key) const override;
  void put(std::string_view collection, std::string_view key,
           const nlohmann::json& document) override;
  bool erase(std::string_view collection, std::string_view key) override;
  std::vector<std::string> keys(std::string_view collection) const override;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path document_path(std::string_view collection,
                                      std::string_view key) const;

  std::filesystem::path root_;
};

std::string encode_key(std::string_view key);
std::string decode_key(std::string_view encoded);

}  // namespace diethelper
