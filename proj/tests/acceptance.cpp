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

// Acceptance suite. One PASS/FAIL line per criterion; exit status is the
// number of failures (capped at 1).

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "diethelper/api.hpp"
#include "diethelper/capture.hpp"
#include "diethelper/catalog.hpp"
#include "diethelper/cli.hpp"
#include "diethelper/error.hpp"
#include "diethelper/filter.hpp"
#include "diethelper/transcript.hpp"
#include "diethelper/users.hpp"
#include "generators.hpp"
#include "oracle.hpp"
#include "test_paths.hpp"

using namespace diethelper;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Steady = std::chrono::steady_clock;

double ms_since(Steady::time_point t) {
  return std::chrono::duration<double, std::milli>(Steady::now() - t).count();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Proc {
  int code = -1;
  std::string out;
};

// /bin/sh -c CMD, stderr discarded
Proc shell(const std::string& cmd) {
  Proc p;
  FILE* pipe = ::popen((cmd + " 2>/dev/null").c_str(), "r");
  if (pipe == nullptr) return p;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) p.out.append(buf, n);
  const int status = ::pclose(pipe);
  p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return p;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

std::string cli() { return quote(test_paths::kCliBinary.string()); }

std::vector<TextFragment> random_fragments(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(0, 6);
  std::vector<TextFragment> out(count(rng));
  for (auto& f : out) f.text = gen::word(rng, 0, 30, "abcdAB ,\t");
  return out;
}

// needles usable as catalog or custom entries: trimmed, non-empty, unique
std::vector<std::string> clean(std::vector<std::string> needles) {
  std::vector<std::string> out;
  for (auto& n : needles) {
    n = oracle::ascii_trim(n);
    if (!n.empty() && !oracle::contains(out, n)) out.push_back(n);
  }
  return out;
}

// random catalog of `count` diets named d0..d{count-1}
Catalog random_catalog(std::mt19937_64& rng, std::size_t count) {
  Catalog catalog;
  std::uniform_int_distribution<std::size_t> n(0, 12);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::string> needles;
    const auto k = n(rng);
    for (std::size_t j = 0; j < k; ++j) needles.push_back(gen::word(rng, 1, 4, "abcd "));
    catalog.upsert_diet({"d" + std::to_string(i), "", clean(needles)}, Role::admin);
  }
  return catalog;
}

std::vector<std::string> random_custom(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n(0, 6);
  std::vector<std::string> out;
  for (int i = n(rng); i > 0; --i) out.push_back(gen::word(rng, 1, 4, "abcd "));
  return clean(out);
}

// a label that always yields at least one token
FragmentList random_label(std::mt19937_64& rng) {
  FragmentList label;
  std::uniform_int_distribution<int> n(1, 20);
  for (int i = n(rng); i > 0; --i) label.fragments.push_back({gen::word(rng, 0, 20, "abcd ")});
  label.fragments.push_back({"x"});
  return label;
}

std::optional<Errc> error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

UserDirectoryOptions fast_users() {
  UserDirectoryOptions o;
  o.hash_cost = HashCost::minimum;
  return o;
}

// --- criteria ---------------------------------------------------------------

Outcome oracle_equivalence() {
  constexpr int kCases = 10000;
  std::mt19937_64 rng(20260101);
  const auto start = Steady::now();
  int mismatches = 0;
  for (int i = 0; i < kCases; ++i) {
    const auto fragments = random_fragments(rng);
    const auto rules = gen::rules(rng);

    std::vector<std::string> texts;
    for (const auto& f : fragments) texts.push_back(f.text);
    const auto expected_tokens =
        oracle::split_then_trim(oracle::ascii_lower(oracle::reduce_join(texts)));

    std::vector<IngredientToken> tokens;
    const auto err = error_code([&] { tokens = tokenize(join_fragments(fragments)); });
    if (expected_tokens.empty()) {
      if (err != Errc::empty_transcript) ++mismatches;
      continue;
    }
    if (err) {
      ++mismatches;
      continue;
    }
    const auto got = to_structured(filter_tokens(tokens, rules));
    const auto want =
        oracle::to_structured(oracle::triple_loop(expected_tokens, gen::to_oracle(rules)));
    if (got != want) ++mismatches;
  }
  const double ms = ms_since(start);
  return {mismatches == 0 && ms < 60000,
          std::to_string(kCases) + " cases, " + std::to_string(mismatches) + " mismatches, " +
              std::to_string(static_cast<int>(ms)) + " ms"};
}

Outcome always_compliant() {
  constexpr int kCases = 1000;
  std::mt19937_64 rng(7);
  const auto seeded = load_seed(test_paths::kSeed);
  int failures = 0;
  for (int i = 0; i < kCases; ++i) {
    const auto label = random_label(rng);
    const UserProfile empty{};
    const auto catalog = random_catalog(rng, 4);
    for (const Catalog* c : {&seeded, &catalog}) {
      const auto r = check_label(label, empty, *c);
      if (r.verdict != Verdict::compliant || !r.violations.empty() || !r.violated_diets.empty()) {
        ++failures;
      }
    }
  }
  // seeded catalog, a label full of forbidden words
  const auto r = check_label(RawText{"milk, wheat, peanuts, honey, gelatine, sugar"}, UserProfile{},
                             seeded);
  if (r.verdict != Verdict::compliant) ++failures;
  return {failures == 0, std::to_string(kCases) + " cases, " + std::to_string(failures) +
                             " non-compliant verdicts"};
}

Outcome custom_only_invariance() {
  constexpr int kCases = 1000;
  std::mt19937_64 rng(11);
  const auto seeded = load_seed(test_paths::kSeed);
  const Catalog empty_catalog;
  int failures = 0;
  for (int i = 0; i < kCases; ++i) {
    const auto label = random_label(rng);
    UserProfile profile;
    profile.uid = "u";
    profile.custom_unwanted_ingredients = random_custom(rng);
    std::uniform_int_distribution<std::size_t> diets(0, 8);
    const auto random = random_catalog(rng, diets(rng));
    const auto reference = check_label(label, profile, empty_catalog);
    if (check_label(label, profile, random) != reference ||
        check_label(label, profile, seeded) != reference) {
      ++failures;
      continue;
    }
    // and the reference is exactly the Custom rule on its own
    std::vector<std::string> texts;
    for (const auto& f : label.fragments) texts.push_back(f.text);
    const auto want = oracle::to_structured(oracle::triple_loop(
        oracle::split_then_trim(oracle::ascii_lower(oracle::reduce_join(texts))),
        {{"Custom", profile.custom_unwanted_ingredients}}));
    if (to_structured(reference) != want) ++failures;
  }
  return {failures == 0,
          std::to_string(kCases) + " cases, " + std::to_string(failures) + " differing results"};
}

Outcome seed_fidelity() {
  const std::set<std::string> expected{"vegan",      "vegetarian", "pesco-vegetarian", "gluten-free",
                                       "sugar-free", "milk-free",  "nut-free"};
  // parse the file independently as well as through the loader
  const auto raw = json::parse(slurp(test_paths::kSeed));
  std::set<std::string> raw_names;
  std::size_t bad = 0, total = 0;
  for (const auto& d : raw["diets"]) {
    raw_names.insert(d["name"].get<std::string>());
    std::set<std::string> seen;
    for (const auto& i : d["forbidden_ingredients"]) {
      const auto s = i.get<std::string>();
      ++total;
      if (s.empty() || s != oracle::ascii_lower(oracle::ascii_trim(s)) ||
          s.find(',') != std::string::npos || !seen.insert(s).second) {
        ++bad;
      }
    }
  }
  const auto catalog = load_seed(test_paths::kSeed);
  std::set<std::string> loaded;
  for (const auto& d : catalog.list_diets()) loaded.insert(d.name);
  const bool ok = raw["diets"].size() == 7 && raw_names == expected && loaded == expected &&
                  catalog.size() == 7 && bad == 0;
  return {ok, std::to_string(loaded.size()) + " diets, " + std::to_string(total) +
                  " ingredients, " + std::to_string(bad) + " failing normalization"};
}

Outcome retake_path() {
  const auto catalog = load_seed(test_paths::kSeed);
  UserProfile profile;
  profile.chosen_diets = {"vegan"};
  std::vector<std::string> problems;

  // library
  if (error_code([&] { check_label(FragmentList{}, profile, catalog); }) != Errc::no_text_found) {
    problems.push_back("check_label(empty fragments)");
  }
  if (error_code([&] { check_label(FragmentList{{{""}, {""}}}, profile, catalog); }) !=
      Errc::no_text_found) {
    problems.push_back("check_label(blank fragments)");
  }
  if (error_code([&] { check_label(FragmentList{{{" , "}, {","}}}, profile, catalog); }) !=
      Errc::empty_transcript) {
    problems.push_back("check_label(all-empty tokens)");
  }

  // api
  Catalog api_catalog = load_seed(test_paths::kSeed);
  UserDirectory users(fast_users());
  ApiService service(api_catalog, users);
  users.register_user("R", "r@example.com", "retake password");
  const auto s = users.authenticate("r@example.com", "retake password");
  auto post = [&](const json& body) {
    return service.handle({"POST", "/api/v1/check",
                           {{"authorization", "Bearer " + s.token},
                            {"content-type", "application/json"}},
                           body.dump()});
  };
  const auto a = post({{"fragments", json::array()}});
  const auto b = post({{"fragments", {" , ", ","}}});
  std::string code_a, code_b;
  try {
    code_a = json::parse(a.body)["error"]["code"];
    code_b = json::parse(b.body)["error"]["code"];
  } catch (const std::exception&) {
  }
  if (a.status != 422 || code_a != "no_text_found") problems.push_back("api no_text_found");
  if (b.status != 422 || code_b != "empty_transcript") problems.push_back("api empty_transcript");

  // cli
  const auto seed = " --seed " + quote(test_paths::kSeed.string());
  if (shell(cli() + " check --diet vegan" + seed + " < /dev/null").code != 2) {
    problems.push_back("cli empty stdin");
  }
  if (shell("printf ' , ,' | " + cli() + " check --diet vegan" + seed).code != 2) {
    problems.push_back("cli all-empty tokens");
  }

  std::string detail = "library, api (" + code_a + " / " + code_b + "), cli exit 2";
  if (!problems.empty()) {
    detail = "failed:";
    for (const auto& p : problems) detail += " " + p + ";";
  }
  return {problems.empty(), detail};
}

Outcome performance() {
  const auto p = shell(cli() + " bench --needles 10000 --tokens 200 --budget-ms 50 --format structured");
  try {
    const auto j = json::parse(p.out);
    const double total = j["automaton_total_ms"];
    std::ostringstream d;
    d.precision(2);
    d << std::fixed << j["tokens"].get<int>() << " tokens x " << j["needles"].get<int>()
      << " needles: automaton " << total << " ms (budget 50), reference " << j["naive_ms"].get<double>()
      << " ms, results " << (j["results_equal"].get<bool>() ? "equal" : "DIFFER");
    return {p.code == 0 && total < 50 && j["results_equal"].get<bool>() &&
                j["needles"] == 10000 && j["tokens"] == 200,
            d.str()};
  } catch (const std::exception& e) {
    return {false, std::string("bench output unreadable: ") + e.what()};
  }
}

Outcome fixture_suite() {
  const auto labels = json::parse(slurp(test_paths::kFixtures / "labels.json"))["labels"];
  const auto scratch = std::filesystem::temp_directory_path() /
                       ("dh-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(scratch);

  Catalog catalog = load_seed(test_paths::kSeed);
  UserDirectory users(fast_users());
  ApiService service(catalog, users);

  int cli_bad = 0, api_bad = 0, unstable = 0, n = 0;
  std::string first_failure;
  for (const auto& label : labels) {
    ++n;
    const std::string name = label["name"];
    const auto expected = slurp(test_paths::kFixtures / "expected" / (name + ".json"));

    // cli
    const auto frag_file = scratch / (name + ".txt");
    {
      std::ofstream f(frag_file, std::ios::binary);
      for (const auto& t : label["fragments"]) f << t.get<std::string>() << '\n';
    }
    std::string cmd = cli() + " check --format structured --seed " +
                      quote(test_paths::kSeed.string()) + " --fragments " + quote(frag_file.string());
    for (const auto& d : label["diets"]) cmd += " --diet " + quote(d);
    for (const auto& c : label["custom"]) cmd += " --custom " + quote(c);
    const auto run1 = shell(cmd);
    const auto run2 = shell(cmd);
    const int want_code = json::parse(expected)["verdict"] == "compliant" ? 0 : 3;
    if (run1.out != expected || run1.code != want_code) {
      ++cli_bad;
      if (first_failure.empty()) first_failure = "cli " + name;
    }
    if (run1.out != run2.out) ++unstable;

    // api
    const auto email = name + "@example.com";
    users.register_user(name, email, "fixture password");
    const auto s = users.authenticate(email, "fixture password");
    auto call = [&](std::string method, std::string path, const json& body) {
      return service.handle({std::move(method), std::move(path),
                             {{"authorization", "Bearer " + s.token},
                              {"content-type", "application/json"}},
                             body.dump()});
    };
    for (const auto& d : label["diets"]) call("POST", "/api/v1/profile/diets", {{"diet", d}});
    for (const auto& c : label["custom"]) call("POST", "/api/v1/profile/ingredients", {{"text", c}});
    const auto r1 = call("POST", "/api/v1/check", {{"fragments", label["fragments"]}});
    const auto r2 = call("POST", "/api/v1/check", {{"fragments", label["fragments"]}});
    if (r1.status != 200 || r1.body != expected) {
      ++api_bad;
      if (first_failure.empty()) first_failure = "api " + name;
    }
    if (r1.body != r2.body || r1.body != run1.out) ++unstable;
  }
  std::filesystem::remove_all(scratch);
  std::string detail = std::to_string(n) + " fixtures, cli mismatches " + std::to_string(cli_bad) +
                       ", api mismatches " + std::to_string(api_bad) + ", unstable " +
                       std::to_string(unstable);
  if (!first_failure.empty()) detail += " (first: " + first_failure + ")";
  return {n >= 20 && cli_bad == 0 && api_bad == 0 && unstable == 0, detail};
}

using Triple = std::tuple<std::size_t, std::string, std::string>;

std::set<Triple> violation_set(const FilterResult& r) {
  std::set<Triple> out;
  for (const auto& v : r.violations) {
    for (const auto& m : v.matches) {
      for (const auto& d : m.diets) out.emplace(v.token_index, m.needle, d);
    }
  }
  return out;
}

bool subset(const std::set<Triple>& a, const std::set<Triple>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

Outcome monotonicity() {
  constexpr int kCases = 1000;
  std::mt19937_64 rng(13);
  int failures = 0;
  for (int i = 0; i < kCases; ++i) {
    std::uniform_int_distribution<std::size_t> diet_count(1, 8);
    const auto n = diet_count(rng);
    const auto catalog = random_catalog(rng, n);
    const auto label = random_label(rng);

    std::vector<std::string> all;
    for (std::size_t d = 0; d < n; ++d) all.push_back("d" + std::to_string(d));
    std::shuffle(all.begin(), all.end(), rng);
    std::uniform_int_distribution<std::size_t> take(0, n - 1);
    UserProfile before;
    before.uid = "m";
    before.custom_unwanted_ingredients = random_custom(rng);
    before.chosen_diets.assign(all.begin(), all.begin() + take(rng));
    const std::string extra = all[before.chosen_diets.size()];

    UserProfile after = before;
    std::uniform_int_distribution<std::size_t> at(0, after.chosen_diets.size());
    after.chosen_diets.insert(after.chosen_diets.begin() + at(rng), extra);

    const auto small = violation_set(check_label(label, before, catalog));
    const auto big = violation_set(check_label(label, after, catalog));
    // adding never shrinks; removing (after -> before) never grows
    if (!subset(small, big)) ++failures;
  }
  return {failures == 0,
          std::to_string(kCases) + " add/remove pairs, " + std::to_string(failures) + " violations"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle-equivalence", oracle_equivalence},
      {"always-compliant-without-diets", always_compliant},
      {"custom-only-ignores-catalog", custom_only_invariance},
      {"seed-fidelity", seed_fidelity},
      {"retake-path", retake_path},
      {"performance-200x10000", performance},
      {"end-to-end-fixtures", fixture_suite},
      {"monotonicity", monotonicity},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o{false, ""};
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
