// Copyright 2026 The phrasereg Authors.
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

#include "phrasereg/cli.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>

#include "phrasereg/corpus.hpp"
#include "phrasereg/reporting.hpp"
#include "phrasereg/search.hpp"
#include "phrasereg/tuning.hpp"

namespace phrasereg::cli {
namespace {

struct Options {
  std::string corpus;
  std::string labels;
  std::string positive_regex;
  std::string ban;
  bool stem = false;
  std::string format = "text";
  int verbosity = 1;
  unsigned threads = 0;
  std::uint64_t seed = 1;

  double C = 1.0;
  std::string q = "2";
  int max_iter = 40;
  bool positive_only = false;
  bool binary_features = false;
  bool no_rescaling = false;
  int min_support = 1;
  int min_pattern = 1;
  int max_pattern = 100;
  int gap = 0;
  double convergence_threshold = 1e-4;

  int permutations = 100;

  std::string phrase;
  int count = 10;
  int window = 5;

  std::string target;
  std::string target_labels;
  bool evaluate = false;

  std::vector<std::string> phrase_list;
  std::string phrases_file;

  int folds = 5;
  std::vector<double> C_grid;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

NormOrder parse_q(const std::string& text) {
  if (text == "inf" || text == "infinity" || text == "Inf") {
    return NormOrder::infinity();
  }
  double q = 0.0;
  try {
    std::size_t used = 0;
    q = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw UsageError(fmt::format("--q: '{}' is not a number", text));
  }
  if (!(q >= 1.0)) throw UsageError(fmt::format("--q: {} is below 1", text));
  // Orders of 10 and above are treated as infinity.
  if (q >= 10.0) return NormOrder::infinity();
  return NormOrder::finite(q);
}

FitConfig fit_config(const Options& o, std::ostream& err) {
  FitConfig config;
  config.rescale.q = parse_q(o.q);
  config.rescale.binary_features = o.binary_features;
  config.rescale.no_rescaling = o.no_rescaling;
  config.penalty.C = o.C;
  config.penalty.positive_only = o.positive_only;
  config.search.max_iter = o.max_iter;
  config.search.convergence_threshold = o.convergence_threshold;
  config.search.min_support = o.min_support;
  config.search.min_pattern = o.min_pattern;
  config.search.max_pattern = o.max_pattern;
  config.search.gap = o.gap;
  config.search.threads = o.threads;
  config.search.verbosity = o.verbosity;
  config.search.log = o.verbosity >= 2 ? &err : nullptr;
  if (o.min_pattern > o.max_pattern) {
    throw UsageError("--min-pattern: must not exceed --max-pattern");
  }
  return config;
}

std::optional<Labeling> load_labeling(const Options& o, const Corpus& corpus) {
  if (!o.labels.empty()) {
    const std::vector<int> values = load_labels(o.labels);
    try {
      return validate_labeling(corpus, values);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("{}: {}", o.labels, e.what()));
    }
  }
  if (!o.positive_regex.empty()) {
    std::regex pattern;
    try {
      pattern = std::regex(o.positive_regex);
    } catch (const std::regex_error& e) {
      throw UsageError(fmt::format("--positive-regex: {}", e.what()));
    }
    std::vector<int> values;
    for (const std::string& raw : read_documents(o.corpus)) {
      values.push_back(std::regex_search(raw, pattern) ? 1 : -1);
    }
    return validate_labeling(corpus, values);
  }
  return std::nullopt;
}

Labeling require_labeling(const Options& o, const Corpus& corpus) {
  std::optional<Labeling> labeling = load_labeling(o, corpus);
  if (!labeling) throw UsageError("--labels or --positive-regex is required");
  return *std::move(labeling);
}

BanList ban_list(const Options& o) {
  return o.ban.empty() ? BanList{} : load_ban_list(o.ban, o.stem);
}

void report_fit(const Options& o, const ModelState& model, std::ostream& err) {
  if (o.verbosity < 1) return;
  fmt::print(err, "fit: {} phrases, {} iterations, {}, loss {:.6g}\n",
             model.features.size(), model.iterations,
             model.converged ? "converged" : "not converged", model.loss);
  if (model.features.empty()) {
    fmt::print(err, "summary is empty at C={}\n", model.config.penalty.C);
  }
}

std::string summarize(const Options& o, std::ostream& err) {
  const Corpus corpus = load_corpus(o.corpus, o.stem);
  const Labeling labeling = require_labeling(o, corpus);
  const FitConfig config = fit_config(o, err);
  const ModelState model = fit(corpus, labeling, ban_list(o), config);
  report_fit(o, model, err);
  return format_summary(summary_table(model, corpus, labeling),
                        parse_output_format(o.format));
}

std::string threshold(const Options& o, std::ostream& err) {
  const Corpus corpus = load_corpus(o.corpus, o.stem);
  const Labeling labeling = require_labeling(o, corpus);
  FitConfig config = fit_config(o, err);
  config.search.log = nullptr;
  const ThresholdReport report = find_threshold_C(
      corpus, labeling, ban_list(o), config, o.permutations, o.seed);
  return format_threshold_report(report, parse_output_format(o.format));
}

std::string fragments(const Options& o, std::ostream&) {
  const Corpus corpus = load_corpus(o.corpus, o.stem);
  const Labeling labeling = load_labeling(o, corpus).value_or(Labeling{});
  const Phrase phrase = Phrase::parse(o.phrase);
  if (!phrase.well_formed()) {
    throw UsageError("--phrase: must start and end with a word");
  }
  return format_fragments(
      sample_fragments(phrase, corpus, labeling, o.count, o.window, o.seed),
      parse_output_format(o.format));
}

std::string predict_command(const Options& o, std::ostream& err) {
  const Corpus corpus = load_corpus(o.corpus, o.stem);
  const Labeling labeling = require_labeling(o, corpus);
  const FitConfig config = fit_config(o, err);
  const ModelState model = fit(corpus, labeling, ban_list(o), config);
  report_fit(o, model, err);
  const OutputFormat format = parse_output_format(o.format);
  std::optional<Corpus> target;
  if (!o.target.empty()) target = load_corpus(o.target, o.stem);
  const Corpus& scored = target ? *target : corpus;
  const std::vector<double> scores = predict(model, scored);
  if (!o.evaluate) return format_predictions(scores, format);

  std::vector<int> truth;
  if (!o.target_labels.empty()) {
    truth = load_labels(o.target_labels);
    try {
      validate_labeling(scored.size(), truth);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("{}: {}", o.target_labels, e.what()));
    }
  } else if (!target) {
    truth.assign(labeling.values().begin(), labeling.values().end());
  } else {
    throw UsageError("--evaluate: --target-labels is required with --target");
  }
  return format_metrics(evaluate(scores, truth), format);
}

std::string profile(const Options& o, std::ostream&) {
  const Corpus corpus = load_corpus(o.corpus, o.stem);
  const Labeling labeling = require_labeling(o, corpus);
  std::vector<std::string> lines = o.phrase_list;
  if (!o.phrases_file.empty()) {
    for (std::string& line : read_lines(o.phrases_file)) {
      lines.push_back(std::move(line));
    }
  }
  if (lines.empty()) throw UsageError("--phrase or --phrases is required");
  std::vector<Phrase> phrases;
  for (const Phrase& p : parse_phrase_list(lines)) {
    if (!p.well_formed()) {
      throw UsageError(fmt::format(
          "--phrase: '{}' must start and end with a word", p.display()));
    }
    phrases.push_back(normalize_phrase(p, corpus.stemmed()));
  }
  return format_summary(phrase_count_table(phrases, corpus, labeling),
                        parse_output_format(o.format));
}

std::string cross_validate(const Options& o, std::ostream& err) {
  const Corpus corpus = load_corpus(o.corpus, o.stem);
  const Labeling labeling = require_labeling(o, corpus);
  FitConfig config = fit_config(o, err);
  config.search.log = nullptr;
  const CrossValidationReport report = cross_validate_C(
      corpus, labeling, ban_list(o), config, o.folds, o.C_grid, o.seed);
  if (o.verbosity >= 1) fmt::print(err, "best C: {}\n", report.best_C);
  return format_cross_validation(report, parse_output_format(o.format));
}

void add_common(CLI::App* app, Options& o, bool labels_allowed) {
  app->add_option("--corpus", o.corpus,
                  "Corpus file (one document per line) or directory")
      ->required();
  if (labels_allowed) {
    auto* labels = app->add_option("--labels", o.labels,
                                   "Label file: one of -1, 0, +1 per line");
    auto* regex = app->add_option(
        "--positive-regex", o.positive_regex,
        "Label raw documents matching this regex +1 and the rest -1");
    labels->excludes(regex);
  }
  app->add_flag("--stem", o.stem, "Porter-stem tokens (stems end in '+')");
  app->add_option("--format", o.format, "text, tsv or json-lines")
      ->check(CLI::IsMember({"text", "tsv", "json-lines"}));
  app->add_option("--verbosity", o.verbosity,
                  "0 silent, 1 diagnostics, 2 per-iteration trace")
      ->check(CLI::Range(0, 10));
  app->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
}

void add_fit(CLI::App* app, Options& o) {
  app->add_option("--ban", o.ban, "File of banned words, one per line");
  app->add_option("-C", o.C, "Penalty")->check(CLI::NonNegativeNumber);
  app->add_option("--q", o.q, "Rescaling norm order; 10 or above is infinity");
  app->add_option("--max-iter", o.max_iter, "Maximum descent iterations")
      ->check(CLI::PositiveNumber);
  app->add_flag("--positive-only", o.positive_only,
                "Restrict phrase coefficients to be non-negative");
  app->add_flag("--binary-features", o.binary_features,
                "Use presence indicators instead of counts");
  app->add_flag("--no-rescaling", o.no_rescaling, "Do not rescale features");
  app->add_option("--min-support", o.min_support,
                  "Minimum total occurrences of a phrase")
      ->check(CLI::PositiveNumber);
  app->add_option("--min-pattern", o.min_pattern, "Minimum phrase length")
      ->check(CLI::PositiveNumber);
  app->add_option("--max-pattern", o.max_pattern, "Maximum phrase length")
      ->check(CLI::PositiveNumber);
  app->add_option("--gap", o.gap, "Maximum run of wildcard words")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--convergence-threshold", o.convergence_threshold,
                  "Stop when the relative loss decrease falls below this")
      ->check(CLI::PositiveNumber);
}

std::string run_parsed(CLI::App& app, const Options& o, std::ostream& err) {
  if (app.got_subcommand("summarize")) return summarize(o, err);
  if (app.got_subcommand("threshold")) return threshold(o, err);
  if (app.got_subcommand("fragments")) return fragments(o, err);
  if (app.got_subcommand("predict")) return predict_command(o, err);
  if (app.got_subcommand("profile")) return profile(o, err);
  return cross_validate(o, err);
}

int fail(std::ostream& err, std::string_view kind, std::string_view message,
         int code) {
  std::string line(message);
  for (char& c : line) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  fmt::print(err, "error: {}: {}\n", kind, line);
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app{"Summarize how labeled documents differ from the rest, using "
               "sparse regression over phrases."};
  app.name("phrasereg");
  app.require_subcommand(1);

  auto* summarize_cmd =
      app.add_subcommand("summarize", "Fit and print the phrase summary");
  add_common(summarize_cmd, o, true);
  add_fit(summarize_cmd, o);

  auto* threshold_cmd = app.add_subcommand(
      "threshold", "Null penalty threshold and its permutation distribution");
  add_common(threshold_cmd, o, true);
  add_fit(threshold_cmd, o);
  threshold_cmd
      ->add_option("--permutations", o.permutations, "Number of permutations")
      ->check(CLI::PositiveNumber);
  threshold_cmd->add_option("--seed", o.seed, "Random seed");

  auto* fragments_cmd = app.add_subcommand(
      "fragments", "Sample occurrences of a phrase in context");
  add_common(fragments_cmd, o, true);
  fragments_cmd->add_option("--phrase", o.phrase, "Phrase; '*' is a wildcard")
      ->required();
  fragments_cmd->add_option("-n,--count", o.count, "Number of fragments")
      ->check(CLI::PositiveNumber);
  fragments_cmd->add_option("--window", o.window, "Context words on each side")
      ->check(CLI::NonNegativeNumber);
  fragments_cmd->add_option("--seed", o.seed, "Random seed");

  auto* predict_cmd = app.add_subcommand(
      "predict", "Fit, then score the training or a target corpus");
  add_common(predict_cmd, o, true);
  add_fit(predict_cmd, o);
  predict_cmd->add_option("--target", o.target, "Corpus to score");
  predict_cmd->add_option("--target-labels", o.target_labels,
                          "Labels of the target corpus for --evaluate");
  predict_cmd->add_flag("--evaluate", o.evaluate,
                        "Print precision, recall, F1 and AUC instead");

  auto* profile_cmd =
      app.add_subcommand("profile", "Count statistics for given phrases");
  add_common(profile_cmd, o, true);
  profile_cmd->add_option("--phrase", o.phrase_list, "Phrase (repeatable)");
  profile_cmd->add_option(
      "--phrases", o.phrases_file,
      "File of phrases: plain lines or json-lines summary records");

  auto* cv_cmd = app.add_subcommand(
      "cv", "Cross-validated squared prediction error over a grid of C");
  add_common(cv_cmd, o, true);
  add_fit(cv_cmd, o);
  cv_cmd->add_option("--folds", o.folds, "Number of folds")
      ->check(CLI::Range(2, 1000000));
  cv_cmd->add_option("--C-grid", o.C_grid, "Comma-separated penalties")
      ->delimiter(',')
      ->required();
  cv_cmd->add_option("--seed", o.seed, "Random seed");

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("phrasereg");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    for (CLI::App* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, "usage", e.what(), kExitUsage);
  }

  try {
    const std::string result = run_parsed(app, o, err);
    out << result;
    out.flush();
    return kExitOk;
  } catch (const UsageError& e) {
    return fail(err, "usage", e.what(), kExitUsage);
  } catch (const Error& e) {
    const int code =
        e.kind() == ErrorKind::kInvalidArgument ? kExitUsage : kExitData;
    return fail(err, error_kind_name(e.kind()), e.what(), code);
  } catch (const std::exception& e) {
    return fail(err, "internal", e.what(), kExitData);
  }
}

}  // namespace phrasereg::cli
