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

// Tables, fragments and predictions built from fitted models.
//
// Statistics are taken over the documents with a non-zero label. The ban
// list plays no part here: any phrase can be counted.

#ifndef PHRASEREG_REPORTING_HPP_
#define PHRASEREG_REPORTING_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phrasereg/corpus.hpp"
#include "phrasereg/phrase.hpp"
#include "phrasereg/posting_index.hpp"
#include "phrasereg/search.hpp"
#include "phrasereg/tuning.hpp"

namespace phrasereg {

struct SummaryRow {
  std::string phrase;
  // Absent for profiled phrases.
  std::optional<double> beta;
  std::size_t num_phrase = 0;
  std::size_t num_reports = 0;
  std::size_t num_tag = 0;
  // Percentages in [0, 100].
  double pct_tag = 0.0;
  double pct_phrase = 0.0;
};

// One row per selected phrase, by |beta| descending, then phrase order.
std::vector<SummaryRow> summary_table(const ModelState& model,
                                      const Corpus& corpus,
                                      const Labeling& labeling);

// Count statistics for arbitrary phrases, in the given order.
std::vector<SummaryRow> phrase_count_table(const std::vector<Phrase>& phrases,
                                           const Corpus& corpus,
                                           const Labeling& labeling);

struct ListTable {
  std::vector<std::string> run_labels;
  struct Row {
    std::string phrase;
    // One entry per run; absent where the run did not select the phrase.
    std::vector<std::optional<double>> betas;
    SummaryRow stats;
  };
  std::vector<Row> rows;
};

// Side-by-side coefficients of several runs on one corpus. Rows are the
// union of selected phrases: the first run's summary order, then phrases new
// to each later run in that run's order. Statistics use `labeling`.
ListTable list_table(
    const std::vector<std::pair<std::string, ModelState>>& runs,
    const Corpus& corpus, const Labeling& labeling);

struct Fragment {
  std::size_t doc = 0;
  int label = 0;
  std::string text;
};

// Up to n matches sampled uniformly without replacement, in document order,
// with `window` surface tokens of context on each side and the match wrapped
// in "**". On a stemmed corpus, unstemmed phrase tokens are stemmed first.
// Documents with label 0 are skipped; an empty labeling searches all.
std::vector<Fragment> sample_fragments(const Phrase& phrase,
                                       const Corpus& corpus,
                                       const Labeling& labeling, int n,
                                       int window, std::uint64_t seed);

// beta0 + sum_j beta_j c_ij / z_j for every document of `corpus`, with z_j
// frozen from training. Throws kStemMismatch when the stemming flags differ.
std::vector<double> predict(const ModelState& model, const Corpus& corpus);
// Same over an index; documents left out of the index score beta0.
std::vector<double> predict(const ModelState& model, const PostingIndex& index);

struct ClassificationMetrics {
  double precision = 0.0;
  double recall = 0.0;
  // Absent when no document is predicted positive.
  std::optional<double> f1;
  double auc = 0.5;
};

// Sign-threshold classification metrics on the +1 class plus AUC. Entries
// with truth 0 are ignored. Throws kSingleClass unless both classes occur.
ClassificationMetrics evaluate(const std::vector<double>& scores,
                               std::span<const int> truth);

struct DesignMatrix {
  // "(intercept)" followed by the phrases in summary order.
  std::vector<std::string> columns;
  // One row per corpus document.
  std::vector<std::vector<double>> rows;
};

DesignMatrix design_matrix(const ModelState& model, const Corpus& corpus);

enum class OutputFormat { kText, kTsv, kJsonLines };

// Throws kInvalidArgument for anything but "text", "tsv", "json-lines".
OutputFormat parse_output_format(std::string_view name);

std::string format_summary(const std::vector<SummaryRow>& rows,
                           OutputFormat format);
std::string format_list_table(const ListTable& table, OutputFormat format);
std::string format_fragments(const std::vector<Fragment>& fragments,
                             OutputFormat format);
std::string format_threshold_report(const ThresholdReport& report,
                                     OutputFormat format);
std::string format_cross_validation(const CrossValidationReport& report,
                                    OutputFormat format);
std::string format_predictions(const std::vector<double>& scores,
                               OutputFormat format);
std::string format_metrics(const ClassificationMetrics& metrics,
                           OutputFormat format);

// Cleans each token of a user-supplied phrase as corpus text is cleaned;
// on a stemmed corpus, tokens without the stem marker are stemmed. Throws
// kInvalidArgument when a token cleans to nothing or to several tokens.
Phrase normalize_phrase(const Phrase& phrase, bool stemmed);

// Reads phrases from plain lines (display form) or json-lines records with
// a "phrase" key. Blank lines are skipped.
std::vector<Phrase> parse_phrase_list(const std::vector<std::string>& lines);

}  // namespace phrasereg

#endif  // PHRASEREG_REPORTING_HPP_
