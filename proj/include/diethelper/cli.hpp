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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "diethelper/api.hpp"
#include "diethelper/filter.hpp"

namespace diethelper::cli {

// Every way the CLI can terminate.
enum ExitCode : int {
  kCompliant = 0,
  kUsageError = 1,
  kNoText = 2,
  kViolations = 3,
};

enum class OutputFormat { human, structured };

struct CliConfig {
  std::filesystem::path seed_path;
  std::optional<std::filesystem::path> store_path;
  std::vector<std::string> diets;
  std::vector<std::string> custom;
  OutputFormat format = OutputFormat::human;
  bool color = false;
};

/// Tokens with violated substrings wrapped in ANSI red (color) or square
/// brackets, followed by the verdict and the violated diets.
std::string render_human(const FilterResult& result, bool color);

struct BenchOptions {
  std::size_t needles = 10000;
  std::size_t tokens = 200;
  std::size_t diets = 8;
  std::size_t repeat = 5;
  std::uint64_t rng_seed = 1;
};

struct BenchReport {
  std::size_t needles = 0;
  std::size_t tokens = 0;
  std::size_t rules = 0;
  std::size_t violations = 0;
  /// Medians over `repeat` runs.
  double build_ms = 0;
  double filter_ms = 0;
  double automaton_total_ms = 0;
  double naive_ms = 0;
  bool results_equal = false;
};

/// Random rule set and label, checked with both backends.
BenchReport run_bench(const BenchOptions& options);

/// Entry point without the program name. `stdout_is_tty` enables color in
/// --color=auto mode.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err, const EnvLookup& env = process_env,
        bool stdout_is_tty = false);

}  // namespace diethelper::cli
