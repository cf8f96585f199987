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

#include "diethelper/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "diethelper/capture.hpp"
#include "diethelper/catalog.hpp"
#include "diethelper/error.hpp"
#include "diethelper/store.hpp"
#include "diethelper/users.hpp"

namespace diethelper::cli {

namespace {

constexpr std::string_view kRed = "\x1b[1;31m";
constexpr std::string_view kReset = "\x1b[0m";

std::string read_stream(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::validation, "cannot read " + path.string());
  return read_stream(in);
}

std::filesystem::path resolve_seed(const std::string& flag, const EnvLookup& env) {
  if (!flag.empty()) return flag;
  if (auto v = env("DIETHELPER_SEED")) return *v;
  return DIETHELPER_DEFAULT_SEED;
}

// The store wins when it already holds diets; otherwise the seed file is used.
Catalog open_catalog(const CliConfig& config) {
  if (config.store_path) {
    Catalog stored(std::make_shared<DirectoryStore>(*config.store_path));
    if (stored.size() > 0) return stored;
  }
  return load_seed(config.seed_path);
}

// Applies --diet and --custom through the same rules as profile edits.
UserProfile emulate_profile(const CliConfig& config, const Catalog& catalog) {
  UserProfile profile;
  for (const auto& d : config.diets) {
    if (!catalog.contains(d)) {
      throw Error(Errc::diet_not_found, "unknown diet \"" + d + "\" (see `diethelper diets`)");
    }
    if (std::find(profile.chosen_diets.begin(), profile.chosen_diets.end(), d) !=
        profile.chosen_diets.end()) {
      throw Error(Errc::already_chosen, "diet \"" + d + "\" given twice");
    }
    profile.chosen_diets.push_back(d);
  }
  for (const auto& c : config.custom) {
    auto ingredient = normalize_custom_ingredient(c);
    auto& list = profile.custom_unwanted_ingredients;
    if (std::find(list.begin(), list.end(), ingredient) != list.end()) {
      throw Error(Errc::duplicate_ingredient, "custom ingredient \"" + ingredient + "\" given twice");
    }
    list.push_back(std::move(ingredient));
  }
  return profile;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2;
}

std::string random_word(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> letter('a', 'z');
  std::string w(len(rng), 'a');
  for (auto& c : w) c = static_cast<char>(letter(rng));
  return w;
}

void add_catalog_options(CLI::App& cmd, std::string& seed, std::string& store) {
  cmd.add_option("--seed", seed, "Seed file (default: $DIETHELPER_SEED or the bundled catalog)");
  cmd.add_option("--store", store, "Document store directory");
}

}  // namespace

std::string render_human(const FilterResult& result, bool color) {
  std::vector<const Violation*> by_token(result.tokens.size(), nullptr);
  for (const auto& v : result.violations) {
    for (std::size_t i = 0; i < result.tokens.size(); ++i) {
      if (result.tokens[i].index == v.token_index) by_token[i] = &v;
    }
  }
  const std::string open = color ? std::string(kRed) : "[";
  const std::string close = color ? std::string(kReset) : "]";

  std::ostringstream out;
  out << "ingredients:\n";
  for (std::size_t i = 0; i < result.tokens.size(); ++i) {
    const auto& token = result.tokens[i];
    out << "  " << std::setw(3) << token.index << "  ";
    if (!by_token[i]) {
      out << token.text << '\n';
      continue;
    }
    std::vector<std::string> needles;
    for (const auto& m : by_token[i]->matches) needles.push_back(m.needle);
    std::size_t pos = 0;
    for (const auto& [b, e] : highlight_spans(token.text, needles)) {
      out << token.text.substr(pos, b - pos) << open << token.text.substr(b, e - b) << close;
      pos = e;
    }
    out << token.text.substr(pos) << "   <- ";
    for (std::size_t m = 0; m < by_token[i]->matches.size(); ++m) {
      const auto& match = by_token[i]->matches[m];
      if (m) out << "; ";
      out << match.needle << ": ";
      for (std::size_t d = 0; d < match.diets.size(); ++d) {
        out << (d ? ", " : "") << match.diets[d];
      }
    }
    out << '\n';
  }
  if (result.verdict == Verdict::compliant) {
    out << "verdict: compliant (no unwanted ingredients were found)\n";
  } else {
    out << "verdict: violations found in " << result.violations.size()
        << (result.violations.size() == 1 ? " ingredient\n" : " ingredients\n");
    out << "violated diets: ";
    for (std::size_t d = 0; d < result.violated_diets.size(); ++d) {
      out << (d ? ", " : "") << result.violated_diets[d];
    }
    out << '\n';
  }
  return out.str();
}

BenchReport run_bench(const BenchOptions& options) {
  std::mt19937_64 rng(options.rng_seed);
  const std::size_t diet_count = std::max<std::size_t>(options.diets, 1);
  std::vector<DietRule> rules(diet_count);
  for (std::size_t d = 0; d + 1 < diet_count; ++d) rules[d].diet = "diet-" + std::to_string(d);
  rules.back().diet = std::string(kCustomDietName);

  std::uniform_int_distribution<std::size_t> pick_rule(0, diet_count - 1);
  std::size_t total = 0;
  while (total < options.needles) {
    auto needle = random_word(rng, 3, 12);
    auto& rule = rules[pick_rule(rng)];
    if (std::find(rule.needles.begin(), rule.needles.end(), needle) != rule.needles.end()) continue;
    rule.needles.push_back(std::move(needle));
    ++total;
  }
  std::vector<IngredientToken> tokens;
  std::uniform_int_distribution<int> words(1, 3);
  for (std::size_t i = 0; i < options.tokens; ++i) {
    std::string text;
    for (int w = words(rng); w > 0; --w) {
      if (!text.empty()) text += ' ';
      text += random_word(rng, 3, 10);
    }
    tokens.push_back({i, std::move(text)});
  }

  using ms = std::chrono::duration<double, std::milli>;
  std::vector<double> build, filter, totals;
  FilterResult fast;
  for (std::size_t r = 0; r < std::max<std::size_t>(options.repeat, 1); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const Matcher matcher(rules);
    const auto t1 = std::chrono::steady_clock::now();
    fast = matcher.filter(tokens);
    const auto t2 = std::chrono::steady_clock::now();
    build.push_back(ms(t1 - t0).count());
    filter.push_back(ms(t2 - t1).count());
    totals.push_back(ms(t2 - t0).count());
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto slow = filter_tokens_naive(tokens, rules);
  const auto t1 = std::chrono::steady_clock::now();

  BenchReport report;
  report.needles = total;
  report.tokens = tokens.size();
  report.rules = rules.size();
  report.violations = fast.violations.size();
  report.build_ms = median(build);
  report.filter_ms = median(filter);
  report.automaton_total_ms = median(totals);
  report.naive_ms = ms(t1 - t0).count();
  report.results_equal = fast == slow && to_structured(fast) == to_structured(slow);
  return report;
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err, const EnvLookup& env, bool stdout_is_tty) {
  CLI::App app{"Checks ingredient labels against diets and personal unwanted ingredients."};
  app.name("diethelper");
  app.require_subcommand(1);

  std::string seed_flag, store_flag, format = "human", color_mode = "auto";
  std::vector<std::string> diets, custom;
  std::string label_file, fragments_file, image_file, ocr_command;

  auto* check = app.add_subcommand("check", "Check one label");
  add_catalog_options(*check, seed_flag, store_flag);
  check->add_option("--diet", diets, "Diet to apply (repeatable)");
  check->add_option("--custom", custom, "Personal unwanted ingredient (repeatable)");
  check->add_option("label", label_file, "Label text file ('-' or omitted: stdin)");
  auto* frag_opt = check->add_option("--fragments", fragments_file,
                                     "File with one OCR fragment per line");
  auto* image_opt = check->add_option("--image", image_file, "Label photo, read via the OCR command");
  check->add_option("--ocr-command", ocr_command,
                    "OCR program for --image (default: $DIETHELPER_OCR_COMMAND)");
  frag_opt->excludes(image_opt);
  check->add_option("--format", format, "human or structured")
      ->check(CLI::IsMember({"human", "structured"}));
  check->add_option("--color", color_mode, "auto, always or never")
      ->check(CLI::IsMember({"auto", "always", "never"}));

  auto* seed_cmd = app.add_subcommand("seed", "Validate a seed file, optionally loading it into a store");
  add_catalog_options(*seed_cmd, seed_flag, store_flag);

  std::string diet_name;
  auto* diets_cmd = app.add_subcommand("diets", "List diets, or show one diet");
  add_catalog_options(*diets_cmd, seed_flag, store_flag);
  diets_cmd->add_option("name", diet_name, "Diet to show in full");
  diets_cmd->add_option("--format", format, "human or structured")
      ->check(CLI::IsMember({"human", "structured"}));

  BenchOptions bench_options;
  double budget_ms = 0;
  auto* bench = app.add_subcommand("bench", "Compare the automaton with the reference matcher");
  bench->add_option("--needles", bench_options.needles, "Total forbidden ingredients");
  bench->add_option("--tokens", bench_options.tokens, "Label length in tokens");
  bench->add_option("--diets", bench_options.diets, "Rules, including Custom");
  bench->add_option("--repeat", bench_options.repeat, "Automaton runs (median reported)");
  bench->add_option("--rng-seed", bench_options.rng_seed, "Corpus generator seed");
  bench->add_option("--budget-ms", budget_ms, "Fail if one automaton check takes longer");
  bench->add_option("--format", format, "human or structured")
      ->check(CLI::IsMember({"human", "structured"}));

  std::string config_file, host;
  int port = -1;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--config", config_file, "JSON config file");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port (0 = any free port)");
  add_catalog_options(*serve, seed_flag, store_flag);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kCompliant : kUsageError;
  }

  CliConfig config;
  config.seed_path = resolve_seed(seed_flag, env);
  if (!store_flag.empty()) config.store_path = store_flag;
  config.diets = diets;
  config.custom = custom;
  config.format = format == "structured" ? OutputFormat::structured : OutputFormat::human;
  config.color = color_mode == "always" || (color_mode == "auto" && stdout_is_tty);

  try {
    if (check->parsed()) {
      const auto catalog = open_catalog(config);
      const auto profile = emulate_profile(config, catalog);
      const bool has_label_file = !label_file.empty() && label_file != "-";
      if (has_label_file + !fragments_file.empty() + !image_file.empty() > 1) {
        err << "give only one of a label file, --fragments or --image\n";
        return kUsageError;
      }
      CaptureRequest request;
      std::unique_ptr<OcrAdapter> adapter;
      if (!image_file.empty()) {
        auto command = ocr_command;
        if (command.empty()) command = env("DIETHELPER_OCR_COMMAND").value_or("");
        std::istringstream words(command);
        std::vector<std::string> argv;
        for (std::string w; words >> w;) argv.push_back(w);
        if (!argv.empty()) adapter = std::make_unique<CommandOcrAdapter>(argv);
        request = ImageFile{image_file};
      } else if (!fragments_file.empty()) {
        request = FragmentList{split_lines(read_file(fragments_file))};
      } else if (has_label_file) {
        request = RawText{read_file(label_file)};
      } else {
        request = RawText{read_stream(in)};
      }
      const auto result = check_label(request, profile, catalog, adapter.get());
      if (config.format == OutputFormat::structured) {
        out << to_structured(result);
      } else {
        out << render_human(result, config.color);
      }
      return result.verdict == Verdict::compliant ? kCompliant : kViolations;
    }

    if (seed_cmd->parsed()) {
      const auto seed = read_seed_file(config.seed_path);
      std::size_t ingredients = 0;
      for (const auto& d : seed) ingredients += d.forbidden_ingredients.size();
      out << "seed " << config.seed_path.string() << ": " << seed.size() << " diets, "
          << ingredients << " forbidden ingredients\n";
      if (config.store_path) {
        Catalog stored(std::make_shared<DirectoryStore>(*config.store_path));
        const auto version = stored.apply_seed(seed);
        out << "stored in " << config.store_path->string() << " (catalog version " << version
            << ")\n";
      }
      return kCompliant;
    }

    if (diets_cmd->parsed()) {
      const auto catalog = open_catalog(config);
      if (!diet_name.empty()) {
        const auto diet = catalog.get_diet(diet_name);
        if (config.format == OutputFormat::structured) {
          out << nlohmann::json(diet).dump(2) << '\n';
        } else {
          out << diet.name << "\n" << diet.description << "\nforbidden ingredients ("
              << diet.forbidden_ingredients.size() << "):\n";
          for (const auto& i : diet.forbidden_ingredients) out << "  " << i << '\n';
        }
        return kCompliant;
      }
      const auto list = catalog.list_diets();
      if (config.format == OutputFormat::structured) {
        auto j = nlohmann::ordered_json::array();
        for (const auto& d : list) {
          j.push_back({{"name", d.name},
                       {"description", d.description},
                       {"ingredient_count", d.ingredient_count}});
        }
        out << j.dump(2) << '\n';
      } else {
        std::size_t width = 4;
        for (const auto& d : list) width = std::max(width, d.name.size());
        for (const auto& d : list) {
          out << std::left << std::setw(static_cast<int>(width) + 2) << d.name << std::right
              << std::setw(4) << d.ingredient_count << "  " << d.description << '\n';
        }
      }
      return kCompliant;
    }

    if (bench->parsed()) {
      const auto report = run_bench(bench_options);
      const bool within = budget_ms <= 0 || report.automaton_total_ms < budget_ms;
      if (config.format == OutputFormat::structured) {
        nlohmann::ordered_json j{{"needles", report.needles},
                                 {"tokens", report.tokens},
                                 {"rules", report.rules},
                                 {"violations", report.violations},
                                 {"build_ms", report.build_ms},
                                 {"filter_ms", report.filter_ms},
                                 {"automaton_total_ms", report.automaton_total_ms},
                                 {"naive_ms", report.naive_ms},
                                 {"results_equal", report.results_equal},
                                 {"within_budget", within}};
        out << j.dump(2) << '\n';
      } else {
        out << std::fixed << std::setprecision(3) << "corpus: " << report.needles
            << " needles in " << report.rules << " rules, " << report.tokens << " tokens, "
            << report.violations << " violating tokens\n"
            << "automaton: build " << report.build_ms << " ms + filter " << report.filter_ms
            << " ms = " << report.automaton_total_ms << " ms\n"
            << "reference: " << report.naive_ms << " ms\n"
            << "results " << (report.results_equal ? "equal" : "DIFFER") << '\n';
      }
      if (!report.results_equal) {
        err << "automaton and reference results differ\n";
        return kUsageError;
      }
      if (!within) {
        err << "automaton check took " << report.automaton_total_ms << " ms, budget "
            << budget_ms << " ms\n";
        return kUsageError;
      }
      return kCompliant;
    }

    if (serve->parsed()) {
      std::optional<std::filesystem::path> file;
      if (!config_file.empty()) file = config_file;
      auto api_config = load_api_config(file, env);
      if (!host.empty()) api_config.host = host;
      if (port >= 0) api_config.port = port;
      if (!seed_flag.empty()) api_config.seed_path = seed_flag;
      if (config.store_path) api_config.store_dir = config.store_path;
      auto runtime = build_runtime(api_config);
      ApiService service(*runtime.catalog, *runtime.users, runtime.adapter, &out);
      HttpServer server(service, api_config.max_body_bytes);
      const int bound = server.bind(api_config.host, api_config.port);
      err << "diethelper listening on " << api_config.host << ":" << bound << " ("
          << runtime.catalog->size() << " diets)\n";
      server.run();
      return kCompliant;
    }
  } catch (const Error& e) {
    if (e.code() == Errc::no_text_found || e.code() == Errc::empty_transcript) {
      err << "diethelper: " << e.what() << '\n';
      return kNoText;
    }
    err << "diethelper: " << errc_name(e.code()) << ": " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "diethelper: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace diethelper::cli
