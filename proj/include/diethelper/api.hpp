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
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "diethelper/error.hpp"
#include "diethelper/filter.hpp"

namespace httplib {
class Server;
}

namespace diethelper {

class Catalog;
class UserDirectory;
class OcrAdapter;

struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path seed_path;
  std::optional<std::filesystem::path> store_dir;
  std::string admin_name = "Administrator";
  std::string admin_email;
  std::string admin_password;
  /// Program and arguments of the OCR command; empty disables image checks.
  std::vector<std::string> ocr_command;
  std::chrono::seconds session_ttl{std::chrono::hours(24)};
  std::size_t max_body_bytes = 16 * 1024 * 1024;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// The process environment.
std::optional<std::string> process_env(const char* name);

/// Defaults, then the JSON config file (if given), then DIETHELPER_* variables.
/// Throws Error(Errc::validation) on a malformed file or value.
ApiConfig load_api_config(const std::optional<std::filesystem::path>& file,
                          const EnvLookup& env = process_env);

struct ApiError {
  std::string code;
  std::string message;
  int http_status = 500;
};

ApiError to_api_error(const Error& error);

struct HttpRequest {
  std::string method;
  /// Raw (still percent-encoded) path without the query string.
  std::string path;
  /// Header names in lowercase.
  std::map<std::string, std::string> headers;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Routes requests to the domain modules. Transport-independent so it can be
// exercised without sockets; HttpServer adapts it to real HTTP.
class ApiService {
 public:
  ApiService(Catalog& catalog, UserDirectory& users,
             std::shared_ptr<const OcrAdapter> adapter = nullptr,
             std::ostream* request_log = nullptr);

  HttpResponse handle(const HttpRequest& request);

 private:
  HttpResponse dispatch(const HttpRequest& request);

  Catalog& catalog_;
  UserDirectory& users_;
  std::shared_ptr<const OcrAdapter> adapter_;
  MatcherCache matchers_;
  std::ostream* log_;
  std::mutex log_mutex_;
};

class HttpServer {
 public:
  HttpServer(ApiService& service, std::size_t max_body_bytes);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws on failure.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void run();
  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
};

// Everything `serve` needs, assembled from a config.
struct ServiceRuntime {
  std::shared_ptr<Catalog> catalog;
  std::shared_ptr<UserDirectory> users;
  std::shared_ptr<const OcrAdapter> adapter;
};

/// Opens the store (or memory), seeds an empty catalog and bootstraps the
/// admin account.
ServiceRuntime build_runtime(const ApiConfig& config);

}  // namespace diethelper
