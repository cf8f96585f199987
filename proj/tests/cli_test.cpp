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

#include <gtest/gtest.h>

#include <httplib.h>
#include <signal.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>
#include <thread>

#include "diethelper/cli.hpp"
#include "test_paths.hpp"

using namespace diethelper;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli_run(std::vector<std::string> args, const std::string& stdin_text = "",
            std::map<std::string, std::string> env = {}) {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  auto lookup = [&](const char* k) -> std::optional<std::string> {
    auto it = env.find(k);
    if (it == env.end()) return std::nullopt;
    return it->second;
  };
  const int code = cli::run(args, in, out, err, lookup, false);
  return {code, out.str(), err.str()};
}

std::vector<std::string> with_seed(std::vector<std::string> args) {
  args.push_back("--seed");
  args.push_back(test_paths::kSeed.string());
  return args;
}

std::filesystem::path scratch(std::string_view tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("dh-cli-" + std::string(tag) + "-" +
              std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// runs the real binary through /bin/sh with the given stdin
Run binary(const std::string& args, const std::string& stdin_text = "") {
  const auto cmd = "printf '%s' '" + stdin_text + "' | " + test_paths::kCliBinary.string() +
                   " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return {-1, "", ""};
  std::string out;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) out.append(buf, n);
  const int status = ::pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, ""};
}

}  // namespace

TEST(Cli, CheckViolation) {
  const auto r = cli_run(with_seed({"check", "--diet", "gluten-free"}), "Wheat Flour, Salt\n");
  EXPECT_EQ(r.code, cli::kViolations) << r.err;
  EXPECT_NE(r.out.find("[wheat] flour"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("violated diets: gluten-free"), std::string::npos) << r.out;
}

TEST(Cli, CheckCompliant) {
  const auto r = cli_run(with_seed({"check", "--diet", "gluten-free"}), "rice, salt");
  EXPECT_EQ(r.code, cli::kCompliant) << r.err;
  EXPECT_NE(r.out.find("verdict: compliant"), std::string::npos);
}

TEST(Cli, NoDietsIsAlwaysCompliant) {
  const auto r = cli_run(with_seed({"check"}), "milk, wheat, peanuts, honey");
  EXPECT_EQ(r.code, cli::kCompliant);
}

TEST(Cli, CustomOnly) {
  const auto r = cli_run(with_seed({"check", "--custom", "Aspartame", "--format", "structured"}),
                         "water, aspartame");
  EXPECT_EQ(r.code, cli::kViolations);
  EXPECT_EQ(json::parse(r.out)["violated_diets"], json::array({"Custom"}));
}

TEST(Cli, RetakeExitCode) {
  EXPECT_EQ(cli_run(with_seed({"check", "--diet", "vegan"}), "").code, cli::kNoText);
  const auto r = cli_run(with_seed({"check", "--diet", "vegan"}), " , ,\n");
  EXPECT_EQ(r.code, cli::kNoText);
  EXPECT_NE(r.err.find("retake"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli_run({}).code, cli::kUsageError);
  EXPECT_EQ(cli_run({"frobnicate"}).code, cli::kUsageError);
  EXPECT_EQ(cli_run(with_seed({"check", "--diet", "keto"}), "x").code, cli::kUsageError);
  EXPECT_EQ(cli_run(with_seed({"check", "--diet", "vegan", "--diet", "vegan"}), "x").code,
            cli::kUsageError);
  EXPECT_EQ(cli_run(with_seed({"check", "--format", "xml"}), "x").code, cli::kUsageError);
  EXPECT_EQ(cli_run({"check", "--seed", "/no/such/seed.json"}, "x").code, cli::kUsageError);
  EXPECT_EQ(cli_run(with_seed({"check", "--image", "/no/such.png"})).code, cli::kUsageError);
  EXPECT_EQ(cli_run({"--help"}).code, cli::kCompliant);
}

TEST(Cli, SeedFromEnvironment) {
  const auto r = cli_run({"diets"}, "", {{"DIETHELPER_SEED", test_paths::kSeed.string()}});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("pesco-vegetarian"), std::string::npos);
}

TEST(Cli, DietsListing) {
  const auto r = cli_run(with_seed({"diets", "--format", "structured"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  std::vector<std::string> names;
  for (const auto& d : j) names.push_back(d["name"]);
  EXPECT_EQ(names, (std::vector<std::string>{"gluten-free", "milk-free", "nut-free",
                                             "pesco-vegetarian", "sugar-free", "vegan",
                                             "vegetarian"}));
  const auto one = cli_run(with_seed({"diets", "vegan"}));
  EXPECT_EQ(one.code, 0);
  EXPECT_NE(one.out.find("honey"), std::string::npos);
  EXPECT_EQ(cli_run(with_seed({"diets", "keto"})).code, cli::kUsageError);
}

TEST(Cli, FragmentsAndLabelFile) {
  const auto dir = scratch("files");
  std::ofstream(dir / "frags.txt") << "Sugar, Skimmed\nMilk Powder\n";
  std::ofstream(dir / "label.txt") << "Sugar, Skimmed Milk Powder";
  const auto a = cli_run(with_seed({"check", "--diet", "milk-free", "--format", "structured",
                                    "--fragments", (dir / "frags.txt").string()}));
  const auto b = cli_run(with_seed({"check", "--diet", "milk-free", "--format", "structured",
                                    (dir / "label.txt").string()}));
  EXPECT_EQ(a.code, cli::kViolations);
  // every fragment gets a trailing comma, so the line break splits
  // "skimmed" from "milk powder"
  EXPECT_EQ(json::parse(a.out)["tokens"].size(), 3u);
  EXPECT_EQ(json::parse(b.out)["tokens"].size(), 2u);
  EXPECT_EQ(cli_run(with_seed({"check", (dir / "label.txt").string(), "--fragments",
                               (dir / "frags.txt").string()}))
                .code,
            cli::kUsageError);
  std::filesystem::remove_all(dir);
}

TEST(Cli, ImageThroughOcrCommand) {
  const auto dir = scratch("image");
  std::ofstream(dir / "photo.txt") << "Honey,\nOats\n";
  const auto r = cli_run(with_seed({"check", "--diet", "vegan", "--image",
                                    (dir / "photo.txt").string(), "--ocr-command", "cat"}));
  EXPECT_EQ(r.code, cli::kViolations) << r.err;
  std::filesystem::remove_all(dir);
}

TEST(Cli, SeedIntoStoreThenCheck) {
  const auto dir = scratch("store");
  const auto store = (dir / "db").string();
  const auto s = cli_run(with_seed({"seed", "--store", store}));
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_NE(s.out.find("7 diets"), std::string::npos);
  // the store wins over a bogus seed path once it holds diets
  const auto r = cli_run({"check", "--store", store, "--seed", "/no/such.json", "--diet", "vegan"},
                         "egg");
  EXPECT_EQ(r.code, cli::kViolations) << r.err;
  std::filesystem::remove_all(dir);
}

TEST(Cli, ColorAlways) {
  const auto r = cli_run(with_seed({"check", "--diet", "vegan", "--color", "always"}), "egg");
  EXPECT_NE(r.out.find("\x1b["), std::string::npos);
  const auto plain = cli_run(with_seed({"check", "--diet", "vegan"}), "egg");
  EXPECT_EQ(plain.out.find("\x1b["), std::string::npos);
}

TEST(Cli, StructuredIsDeterministic) {
  const auto args = with_seed({"check", "--diet", "vegan", "--diet", "nut-free", "--custom", "palm",
                               "--format", "structured"});
  const std::string label = "Almond Milk, Palm Oil, Honey, Sugar";
  const auto first = cli_run(args, label).out;
  for (int i = 0; i < 5; ++i) EXPECT_EQ(cli_run(args, label).out, first);
}

TEST(Cli, BenchSmall) {
  const auto r = cli_run({"bench", "--needles", "500", "--tokens", "50", "--repeat", "1",
                          "--format", "structured"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["needles"], 500);
  EXPECT_EQ(j["results_equal"], true);
}

TEST(CliBinary, ExitCodes) {
  const auto seed = " --seed " + test_paths::kSeed.string();
  EXPECT_EQ(binary("check --diet gluten-free" + seed).code, 2);
  EXPECT_EQ(binary("check --diet gluten-free" + seed, "rice, salt").code, 0);
  EXPECT_EQ(binary("check --diet gluten-free" + seed, "wheat flour, salt").code, 3);
  EXPECT_EQ(binary("check --diet nope" + seed, "x").code, 1);
  EXPECT_EQ(binary("").code, 1);
}

TEST(CliBinary, ServeAnswersHealth) {
  const auto dir = scratch("serve");
  // port 0 picks a free port; the chosen one is printed on stderr
  const auto log = dir / "stderr.txt";
  const auto cmd = test_paths::kCliBinary.string() + " serve --port 0 --seed " +
                   test_paths::kSeed.string() + " > /dev/null 2> " + log.string() +
                   " & echo $!";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  int pid = 0;
  ASSERT_EQ(std::fscanf(pipe, "%d", &pid), 1);
  ::pclose(pipe);
  int port = 0;
  for (int i = 0; i < 100 && port == 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    std::ifstream in(log);
    std::string line;
    std::getline(in, line);
    const auto colon = line.rfind(':');
    if (colon != std::string::npos) port = std::atoi(line.c_str() + colon + 1);
  }
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/api/v1/health");
  ::kill(pid, SIGTERM);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_NE(res->body.find("\"ok\""), std::string::npos) << res->body;
  std::filesystem::remove_all(dir);
}
