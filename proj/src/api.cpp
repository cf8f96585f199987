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

#include "diethelper/api.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>
#include <sodium.h>

#include "diethelper/capture.hpp"
#include "diethelper/catalog.hpp"
#include "diethelper/store.hpp"
#include "diethelper/users.hpp"

namespace diethelper {

namespace {

using nlohmann::json;

// Failures that originate in the HTTP layer rather than a module.
struct RequestError {
  ApiError error;
};

[[noreturn]] void bad_request(const std::string& message) {
  throw RequestError{{"bad_request", message, 400}};
}

HttpResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump(2) + "\n"};
}

HttpResponse error_response(const ApiError& e) {
  const bool retake = e.code == "no_text_found" || e.code == "empty_transcript";
  return json_response(e.http_status,
                       {{"error", {{"code", e.code}, {"message", e.message}, {"retake", retake}}}});
}

std::string percent_decode(std::string_view s) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && nibble(s[i + 1]) >= 0 &&
        nibble(s[i + 2]) >= 0) {
      out += static_cast<char>(nibble(s[i + 1]) * 16 + nibble(s[i + 2]));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    const auto slash = path.find('/');
    out.push_back(percent_decode(path.substr(0, slash)));
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash);
  }
  return out;
}

json parse_body(const HttpRequest& req) {
  if (req.body.empty()) bad_request("request body must be a JSON object");
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) bad_request("request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    bad_request(std::string("malformed JSON: ") + e.what());
  }
}

std::string string_field(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end() || !it->is_string()) {
    bad_request(std::string("field \"") + name + "\" must be a string");
  }
  return it->get<std::string>();
}

json profile_json(const UserProfile& p) {
  json j = p;
  return j;
}

std::string header(const HttpRequest& req, const std::string& name) {
  auto it = req.headers.find(name);
  return it == req.headers.end() ? std::string{} : it->second;
}

std::vector<std::byte> decode_base64(const std::string& text) {
  std::vector<unsigned char> out(text.size());
  std::size_t len = 0;
  if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), " \r\n",
                        &len, nullptr, sodium_base64_VARIANT_ORIGINAL) != 0) {
    bad_request("image_base64 is not valid base64");
  }
  std::vector<std::byte> bytes(len);
  for (std::size_t i = 0; i < len; ++i) bytes[i] = static_cast<std::byte>(out[i]);
  return bytes;
}

CaptureRequest parse_check_request(const HttpRequest& req) {
  const auto type = header(req, "content-type");
  if (type.rfind("image/", 0) == 0 || type.rfind("application/octet-stream", 0) == 0) {
    ImageBytes image;
    image.data.resize(req.body.size());
    for (std::size_t i = 0; i < req.body.size(); ++i) {
      image.data[i] = static_cast<std::byte>(req.body[i]);
    }
    return image;
  }
  const auto body = parse_body(req);
  const int sources = static_cast<int>(body.contains("text")) +
                      static_cast<int>(body.contains("fragments")) +
                      static_cast<int>(body.contains("image_base64"));
  if (sources != 1) {
    bad_request("provide exactly one of \"text\", \"fragments\" or \"image_base64\"");
  }
  if (body.contains("text")) return RawText{string_field(body, "text")};
  if (body.contains("fragments")) {
    const auto& list = body["fragments"];
    if (!list.is_array()) bad_request("\"fragments\" must be an array of strings");
    FragmentList fragments;
    for (const auto& f : list) {
      if (!f.is_string()) bad_request("\"fragments\" must be an array of strings");
      fragments.fragments.push_back({f.get<std::string>()});
    }
    return fragments;
  }
  ImageBytes image;
  image.data = decode_base64(string_field(body, "image_base64"));
  if (body.contains("filename")) image.name = string_field(body, "filename");
  return image;
}

int env_int(const std::string& name, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::validation, name + " must be an integer, got \"" + value + "\"");
  }
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

std::optional<std::string> process_env(const char* name) {
  if (const char* v = std::getenv(name)) return std::string(v);
  return std::nullopt;
}

ApiConfig load_api_config(const std::optional<std::filesystem::path>& file,
                          const EnvLookup& env) {
  ApiConfig config;
  config.seed_path = DIETHELPER_DEFAULT_SEED;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(Errc::validation, "cannot open config file " + file->string());
    try {
      const auto j = json::parse(in);
      config.host = j.value("host", config.host);
      config.port = j.value("port", config.port);
      if (j.contains("seed")) config.seed_path = j["seed"].get<std::string>();
      if (j.contains("store")) config.store_dir = j["store"].get<std::string>();
      if (j.contains("admin")) {
        const auto& a = j["admin"];
        config.admin_name = a.value("name", config.admin_name);
        config.admin_email = a.value("email", std::string{});
        config.admin_password = a.value("password", std::string{});
      }
      if (j.contains("ocr_command")) {
        config.ocr_command = j["ocr_command"].get<std::vector<std::string>>();
      }
      if (j.contains("session_ttl_seconds")) {
        config.session_ttl = std::chrono::seconds(j["session_ttl_seconds"].get<long>());
      }
      if (j.contains("max_body_bytes")) {
        config.max_body_bytes = j["max_body_bytes"].get<std::size_t>();
      }
    } catch (const json::exception& e) {
      throw Error(Errc::validation,
                  "invalid config file " + file->string() + ": " + e.what());
    }
  }
  if (auto v = env("DIETHELPER_HOST")) config.host = *v;
  if (auto v = env("DIETHELPER_PORT")) config.port = env_int("DIETHELPER_PORT", *v);
  if (auto v = env("DIETHELPER_SEED")) config.seed_path = *v;
  if (auto v = env("DIETHELPER_STORE")) config.store_dir = *v;
  if (auto v = env("DIETHELPER_ADMIN_NAME")) config.admin_name = *v;
  if (auto v = env("DIETHELPER_ADMIN_EMAIL")) config.admin_email = *v;
  if (auto v = env("DIETHELPER_ADMIN_PASSWORD")) config.admin_password = *v;
  if (auto v = env("DIETHELPER_OCR_COMMAND")) config.ocr_command = split_words(*v);
  if (auto v = env("DIETHELPER_SESSION_TTL")) {
    config.session_ttl = std::chrono::seconds(env_int("DIETHELPER_SESSION_TTL", *v));
  }
  if (config.port < 0 || config.port > 65535) {
    throw Error(Errc::validation, "port out of range: " + std::to_string(config.port));
  }
  return config;
}

ApiError to_api_error(const Error& error) {
  int status = 500;
  switch (error.code()) {
    case Errc::empty_transcript:
    case Errc::no_text_found: status = 422; break;
    case Errc::adapter_unavailable: status = 503; break;
    case Errc::seed_parse:
    case Errc::seed_validation:
    case Errc::storage: status = 500; break;
    case Errc::validation:
    case Errc::weak_password:
    case Errc::empty_ingredient: status = 400; break;
    case Errc::diet_not_found:
    case Errc::user_not_found:
    case Errc::not_chosen:
    case Errc::not_present: status = 404; break;
    case Errc::unauthenticated:
    case Errc::invalid_credentials: status = 401; break;
    case Errc::unauthorized: status = 403; break;
    case Errc::email_taken:
    case Errc::already_chosen:
    case Errc::duplicate_ingredient: status = 409; break;
  }
  return {std::string(errc_name(error.code())), error.what(), status};
}

ApiService::ApiService(Catalog& catalog, UserDirectory& users,
                       std::shared_ptr<const OcrAdapter> adapter,
                       std::ostream* request_log)
    : catalog_(catalog), users_(users), adapter_(std::move(adapter)), log_(request_log) {}

HttpResponse ApiService::handle(const HttpRequest& request) {
  const auto started = std::chrono::steady_clock::now();
  HttpResponse response;
  std::string code;
  try {
    response = dispatch(request);
  } catch (const Error& e) {
    auto err = to_api_error(e);
    code = err.code;
    response = error_response(err);
  } catch (const RequestError& e) {
    code = e.error.code;
    response = error_response(e.error);
  } catch (const std::exception& e) {
    code = "internal_error";
    response = error_response({code, e.what(), 500});
  }
  if (log_ != nullptr) {
    const auto elapsed = std::chrono::duration<double, std::milli>(
        std::chrono::steady_clock::now() - started);
    json line{{"ts_ms", std::chrono::duration_cast<std::chrono::milliseconds>(
                            Clock::now().time_since_epoch())
                            .count()},
              {"method", request.method},
              {"path", request.path},
              {"status", response.status},
              {"duration_ms", elapsed.count()}};
    if (!code.empty()) line["error"] = code;
    std::lock_guard lock(log_mutex_);
    *log_ << line.dump() << '\n' << std::flush;
  }
  return response;
}

HttpResponse ApiService::dispatch(const HttpRequest& req) {
  const auto seg = split_path(req.path);
  const auto& method = req.method;
  auto route_is = [&](std::initializer_list<std::string_view> prefix) {
    if (seg.size() != prefix.size()) return false;
    std::size_t i = 0;
    for (auto p : prefix) {
      if (p != "*" && seg[i] != p) return false;
      ++i;
    }
    return true;
  };
  auto not_allowed = [&]() -> HttpResponse {
    throw RequestError{{"method_not_allowed",
                        method + " is not supported on " + req.path, 405}};
  };
  auto session = [&]() {
    const auto auth = header(req, "authorization");
    constexpr std::string_view kBearer = "Bearer ";
    if (auth.rfind(kBearer, 0) != 0) {
      throw Error(Errc::unauthenticated, "missing bearer token");
    }
    return users_.validate(std::string_view(auth).substr(kBearer.size()));
  };

  if (seg.size() < 2 || seg[0] != "api" || seg[1] != "v1") {
    throw RequestError{{"route_not_found", "no route for " + req.path, 404}};
  }

  if (route_is({"api", "v1", "health"})) {
    if (method != "GET") return not_allowed();
    return json_response(200, {{"status", "ok"}, {"catalog_version", catalog_.version()}});
  }

  if (route_is({"api", "v1", "register"})) {
    if (method != "POST") return not_allowed();
    const auto body = parse_body(req);
    const auto profile = users_.register_user(string_field(body, "name"),
                                              string_field(body, "email"),
                                              string_field(body, "password"));
    return json_response(201, profile_json(profile));
  }

  if (route_is({"api", "v1", "login"})) {
    if (method != "POST") return not_allowed();
    const auto body = parse_body(req);
    const auto s = users_.authenticate(string_field(body, "email"),
                                       string_field(body, "password"));
    return json_response(
        200, {{"token", s.token},
              {"uid", s.uid},
              {"role", role_name(s.role)},
              {"expires_at", std::chrono::duration_cast<std::chrono::seconds>(
                                 s.expiry.time_since_epoch())
                                 .count()}});
  }

  if (route_is({"api", "v1", "logout"})) {
    if (method != "POST") return not_allowed();
    const auto s = session();
    users_.logout(s.token);
    return json_response(200, {{"status", "logged_out"}});
  }

  if (route_is({"api", "v1", "diets"})) {
    if (method != "GET") return not_allowed();
    json list = json::array();
    for (const auto& d : catalog_.list_diets()) {
      list.push_back({{"name", d.name},
                      {"description", d.description},
                      {"ingredient_count", d.ingredient_count}});
    }
    return json_response(200, {{"version", catalog_.version()}, {"diets", list}});
  }

  if (route_is({"api", "v1", "diets", "*"})) {
    if (method != "GET") return not_allowed();
    return json_response(200, json(catalog_.get_diet(seg[3])));
  }

  if (route_is({"api", "v1", "profile"})) {
    const auto s = session();
    if (method == "GET") return json_response(200, profile_json(users_.get_profile(s, s.uid)));
    if (method == "PATCH") {
      const auto body = parse_body(req);
      return json_response(200, profile_json(users_.rename(s, s.uid, string_field(body, "name"))));
    }
    return not_allowed();
  }

  if (route_is({"api", "v1", "profile", "diets"})) {
    if (method != "POST") return not_allowed();
    const auto s = session();
    const auto body = parse_body(req);
    return json_response(
        200, profile_json(users_.choose_diet(s, s.uid, string_field(body, "diet"), catalog_)));
  }

  if (route_is({"api", "v1", "profile", "diets", "*"})) {
    if (method != "DELETE") return not_allowed();
    const auto s = session();
    return json_response(200, profile_json(users_.remove_diet(s, s.uid, seg[4])));
  }

  if (route_is({"api", "v1", "profile", "ingredients"})) {
    if (method != "POST") return not_allowed();
    const auto s = session();
    const auto body = parse_body(req);
    return json_response(
        200, profile_json(users_.add_custom_ingredient(s, s.uid, string_field(body, "text"))));
  }

  if (route_is({"api", "v1", "profile", "ingredients", "*"})) {
    if (method != "DELETE") return not_allowed();
    const auto s = session();
    return json_response(200, profile_json(users_.remove_custom_ingredient(s, s.uid, seg[4])));
  }

  if (route_is({"api", "v1", "users", "*"})) {
    if (method != "GET") return not_allowed();
    const auto s = session();
    return json_response(200, profile_json(users_.get_profile(s, seg[3])));
  }

  if (route_is({"api", "v1", "check"})) {
    if (method != "POST") return not_allowed();
    const auto s = session();
    const auto profile = users_.get_profile(s, s.uid);
    const auto capture = parse_check_request(req);
    const auto result = check_label(capture, profile, catalog_, adapter_.get(), &matchers_);
    return {200, "application/json", to_structured(result)};
  }

  if (route_is({"api", "v1", "admin", "diets", "*"})) {
    const auto s = session();
    if (method == "PUT") {
      const auto body = parse_body(req);
      Diet diet;
      diet.name = seg[4];
      diet.description = body.value("description", std::string{});
      if (!body.contains("forbidden_ingredients") ||
          !body["forbidden_ingredients"].is_array()) {
        bad_request("\"forbidden_ingredients\" must be an array of strings");
      }
      try {
        diet.forbidden_ingredients =
            body["forbidden_ingredients"].get<std::vector<std::string>>();
      } catch (const json::exception&) {
        bad_request("\"forbidden_ingredients\" must be an array of strings");
      }
      const auto version = catalog_.upsert_diet(std::move(diet), s.role);
      return json_response(200, {{"version", version}, {"diet", catalog_.get_diet(seg[4])}});
    }
    if (method == "DELETE") {
      return json_response(200, {{"version", catalog_.delete_diet(seg[4], s.role)}});
    }
    return not_allowed();
  }

  if (route_is({"api", "v1", "admin", "users"})) {
    if (method != "GET") return not_allowed();
    const auto s = session();
    json list = json::array();
    for (const auto& p : users_.list_users(s)) list.push_back(profile_json(p));
    return json_response(200, {{"users", list}});
  }

  if (route_is({"api", "v1", "admin", "users", "*"})) {
    if (method != "DELETE") return not_allowed();
    const auto s = session();
    users_.admin_delete_user(s, seg[4]);
    return json_response(200, {{"status", "deleted"}, {"uid", seg[4]}});
  }

  throw RequestError{{"route_not_found", "no route for " + req.path, 404}};
}

HttpServer::HttpServer(ApiService& service, std::size_t max_body_bytes)
    : server_(std::make_unique<httplib::Server>()) {
  server_->set_payload_max_length(max_body_bytes);
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Authorization, Content-Type"},
                                {"Access-Control-Allow-Methods",
                                 "GET, POST, PUT, PATCH, DELETE, OPTIONS"}});
  auto handler = [&service](const httplib::Request& in, httplib::Response& out) {
    HttpRequest req;
    req.method = in.method;
    const auto& target = in.target.empty() ? in.path : in.target;
    req.path = target.substr(0, target.find('?'));
    for (const auto& [k, v] : in.headers) {
      std::string name = k;
      for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      req.headers[name] = v;
    }
    req.body = in.body;
    const auto res = service.handle(req);
    out.status = res.status;
    out.set_content(res.body, res.content_type);
  };
  const std::string any = ".*";
  server_->Get(any, handler);
  server_->Post(any, handler);
  server_->Put(any, handler);
  server_->Patch(any, handler);
  server_->Delete(any, handler);
  server_->Options(any, [](const httplib::Request&, httplib::Response& out) {
    out.status = 204;
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw std::runtime_error("cannot bind to " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind to " + host + ":" + std::to_string(port) +
                             " (port busy or not permitted)");
  }
  return port;
}

void HttpServer::run() { server_->listen_after_bind(); }

void HttpServer::stop() { server_->stop(); }

ServiceRuntime build_runtime(const ApiConfig& config) {
  ServiceRuntime rt;
  std::shared_ptr<DocumentStore> store;
  if (config.store_dir) store = std::make_shared<DirectoryStore>(*config.store_dir);
  rt.catalog = store ? std::make_shared<Catalog>(store) : std::make_shared<Catalog>();
  if (rt.catalog->size() == 0) {
    const auto seed = read_seed_file(config.seed_path);
    rt.catalog->apply_seed(seed);
  }
  UserDirectoryOptions options;
  options.session_ttl = config.session_ttl;
  rt.users = std::make_shared<UserDirectory>(options, store);
  if (!config.admin_email.empty()) {
    rt.users->bootstrap_admin(config.admin_name, config.admin_email, config.admin_password);
  }
  if (!config.ocr_command.empty()) {
    rt.adapter = std::make_shared<CommandOcrAdapter>(config.ocr_command);
  }
  return rt;
}

}  // namespace diethelper
