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

#include "diethelper/store.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <system_error>

#include "diethelper/error.hpp"

namespace diethelper {

namespace fs = std::filesystem;

std::optional<nlohmann::json> MemoryStore::get(std::string_view collection,
                                               std::string_view key) const {
  std::lock_guard lock(mutex_);
  auto c = collections_.find(collection);
  if (c == collections_.end()) return std::nullopt;
  auto d = c->second.find(std::string(key));
  if (d == c->second.end()) return std::nullopt;
  return d->second;
}

void MemoryStore::put(std::string_view collection, std::string_view key,
                      const nlohmann::json& document) {
  std::lock_guard lock(mutex_);
  collections_[std::string(collection)][std::string(key)] = document;
}

bool MemoryStore::erase(std::string_view collection, std::string_view key) {
  std::lock_guard lock(mutex_);
  auto c = collections_.find(collection);
  if (c == collections_.end()) return false;
  return c->second.erase(std::string(key)) > 0;
}

std::vector<std::string> MemoryStore::keys(std::string_view collection) const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  auto c = collections_.find(collection);
  if (c == collections_.end()) return out;
  for (const auto& [k, _] : c->second) out.push_back(k);
  return out;
}

std::string encode_key(std::string_view key) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : key) {
    const bool plain = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                       (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (plain) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

std::string decode_key(std::string_view encoded) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  std::string out;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] == '%' && i + 2 < encoded.size() &&
        nibble(encoded[i + 1]) >= 0 && nibble(encoded[i + 2]) >= 0) {
      out += static_cast<char>(nibble(encoded[i + 1]) * 16 +
                               nibble(encoded[i + 2]));
      i += 2;
    } else {
      out += encoded[i];
    }
  }
  return out;
}

DirectoryStore::DirectoryStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) {
    throw Error(Errc::storage,
                "cannot create store directory " + root_.string() + ": " +
                    ec.message());
  }
}

fs::path DirectoryStore::document_path(std::string_view collection,
                                       std::string_view key) const {
  return root_ / encode_key(collection) / (encode_key(key) + ".json");
}

std::optional<nlohmann::json> DirectoryStore::get(std::string_view collection,
                                                  std::string_view key) const {
  const auto path = document_path(collection, key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::storage,
                "corrupt document " + path.string() + ": " + e.what());
  }
}

void DirectoryStore::put(std::string_view collection, std::string_view key,
                         const nlohmann::json& document) {
  static std::atomic<unsigned long> counter{0};
  const auto path = document_path(collection, key);
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << document.dump(2) << '\n';
    if (!out) {
      throw Error(Errc::storage, "cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::storage, "cannot replace " + path.string());
  }
}

bool DirectoryStore::erase(std::string_view collection, std::string_view key) {
  std::error_code ec;
  return fs::remove(document_path(collection, key), ec);
}

std::vector<std::string> DirectoryStore::keys(
    std::string_view collection) const {
  std::vector<std::string> out;
  const auto dir = root_ / encode_key(collection);
  std::error_code ec;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end;
       it.increment(ec)) {
    const auto name = it->path().filename().string();
    constexpr std::string_view kExt = ".json";
    if (name.size() > kExt.size() &&
        name.compare(name.size() - kExt.size(), kExt.size(), kExt) == 0) {
      out.push_back(decode_key(name.substr(0, name.size() - kExt.size())));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace diethelper
