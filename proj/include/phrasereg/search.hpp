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

// Greedy coordinate descent over the space of all phrases.
//
// Each iteration re-solves the intercept exactly, finds the coordinate with
// the steepest available descent (in-model phrases, then every unigram, then
// children of unigrams breadth-first within each unigram's subtree) and
// minimizes the objective exactly along it. A subtree is skipped when the
// Hoelder bound on what any of its at-zero phrases could offer cannot beat
// the best candidate seen so far, so the pruned scan returns the same phrase
// as the exhaustive one.
//
// Candidates are ranked by descent magnitude, then by canonical phrase order
// (shorter first, then lexicographic). Magnitudes are compared after
// truncating the low 20 mantissa bits, which makes near-ties from rounding
// resolve by phrase order instead of by noise.

#ifndef PHRASEREG_SEARCH_HPP_
#define PHRASEREG_SEARCH_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "phrasereg/corpus.hpp"
#include "phrasereg/objective.hpp"
#include "phrasereg/phrase.hpp"
#include "phrasereg/posting_index.hpp"

namespace phrasereg {

struct SearchConfig {
  int max_iter = 40;
  double convergence_threshold = 1e-4;
  int min_support = 1;
  int min_pattern = 1;
  int max_pattern = 100;
  int gap = 0;
  // Worker threads for the subtree scans; 0 means hardware concurrency.
  unsigned threads = 1;
  // >= 2 writes one line per iteration to `log`.
  int verbosity = 0;
  std::ostream* log = nullptr;
};

struct FitConfig {
  LossKind loss = LossKind::kSquaredHinge;
  RescaleConfig rescale;
  PenaltyConfig penalty;
  SearchConfig search;
};

// Throws kInvalidArgument for out-of-domain settings.
void validate(const FitConfig& config);

struct SelectedPhrase {
  Phrase phrase;
  double beta = 0.0;
  double z = 1.0;
};

struct TraceEntry {
  // Coordinate updated in this iteration; empty for the starting point and
  // for an iteration that only moved the intercept.
  std::optional<Phrase> phrase;
  double loss = 0.0;
};

struct ModelState {
  double intercept = 0.0;
  // Non-zero coefficients, in order of first selection.
  std::vector<SelectedPhrase> features;
  FitConfig config;
  bool stemmed = false;
  // Document ids of the rows taking part in the fit, and their margins.
  std::vector<std::uint32_t> rows;
  std::vector<double> margins;
  std::vector<TraceEntry> trace;
  double loss = 0.0;
  int iterations = 0;
  bool converged = false;

  const SelectedPhrase* find(const Phrase& phrase) const;
};

struct Candidate {
  PhraseIds phrase;
  double magnitude = 0.0;
  bool in_model = false;
  // Only filled for phrases not in the model.
  OccurrenceList occurrences;
};

// Magnitudes at or below this are not descent directions.
inline constexpr double kMinDescent = 1e-12;

// Total order used to pick the best candidate.
bool ranks_before(const Candidate& a, const Candidate& b);

// True when no phrase under a node with this bound can outrank `best`.
bool can_prune(double bound, std::size_t node_length,
               const std::optional<Candidate>& best);

// Upper bound on the at-zero descent magnitude of any phrase whose counts
// are dominated by `counts` (given as (row, count) pairs):
//   0 v max{ |w_neg|_r, |w_pos|_r } - C a,  w_i = |xi'(m_i)|, 1/r = 1 - 1/q,
// over the rows where the count is positive. Without rescaling the counts
// themselves weight w. Positive-only mode keeps only the positive side.
double prune_bound(std::span<const std::uint32_t> rows,
                   std::span<const double> counts,
                   std::span<const double> margins,
                   std::span<const std::int8_t> y, LossKind kind,
                   const RescaleConfig& rescale, const PenaltyConfig& penalty);

// True iff the relative decrease of the last two trace values is below
// `threshold`. Needs at least two entries.
bool converged(std::span<const double> losses, double threshold);

enum class SearchMode { kPruned, kExhaustive };

// Mutable optimizer state over one posting index. The labeling may differ
// from the one used to build the index (e.g. a permutation) as long as the
// same documents are included.
class Trainer {
 public:
  Trainer(const PostingIndex& index, const Labeling& labeling,
          FitConfig config);

  // Replaces the model with the given coefficients; margins and loss are
  // recomputed from scratch.
  void assign(double intercept,
              const std::vector<std::pair<PhraseIds, double>>& coefficients);

  // Exact minimization along the intercept.
  void update_intercept();

  std::optional<Candidate> find_highest_gradient(
      SearchMode mode = SearchMode::kPruned) const;

  // Exact minimization along the candidate's coefficient. Returns the new
  // coefficient (0 when the phrase is left out or evicted).
  double line_search_update(const Candidate& candidate);

  // Runs the descent until convergence or max_iter and returns the model.
  ModelState run();

  ModelState snapshot() const;

  // Evaluation helpers exposed for tuning and tests.
  double at_zero_magnitude(const OccurrenceList& occurrences) const;
  double smooth_gradient_of(const OccurrenceList& occurrences) const;
  double prune_bound_of(const OccurrenceList& occurrences) const;

  double intercept() const { return intercept_; }
  double loss() const { return loss_; }
  double loss_from_scratch() const;
  std::span<const double> margins() const { return margins_; }
  std::span<const std::int8_t> labels() const { return y_; }
  std::size_t row_count() const { return y_.size(); }
  // Row of a document, or -1 when it is excluded.
  std::int32_t row_of(std::uint32_t doc) const { return row_of_doc_[doc]; }
  const FitConfig& config() const { return config_; }
  const PostingIndex& index() const { return index_; }
  std::size_t feature_count() const { return features_.size(); }
  double coefficient(const PhraseIds& phrase) const;

 private:
  struct Feature {
    PhraseIds phrase;
    double beta = 0.0;
    double z = 1.0;
    FeatureColumn column;
  };

  struct Evaluation {
    double smooth = 0.0;
    double bound = 0.0;
  };

  Evaluation evaluate(const OccurrenceList& occurrences,
                      std::span<const double> weights) const;
  double at_zero(double smooth) const;
  FeatureColumn column_for(const OccurrenceList& occurrences,
                           double* z) const;
  // Minimizer of the objective along one coordinate. `effect` holds the
  // per-unit change of each listed row's margin.
  double minimize_along(std::span<const std::uint32_t> rows,
                        std::span<const double> effect, double current,
                        bool penalized) const;
  // Objective change when that coordinate moves from `current` to `next`.
  double objective_change(std::span<const std::uint32_t> rows,
                          std::span<const double> effect, double current,
                          double next, bool penalized) const;
  void apply(std::span<const std::uint32_t> rows,
             std::span<const double> effect, double delta);
  void remove_feature(std::size_t slot);

  const PostingIndex& index_;
  FitConfig config_;
  std::vector<std::int8_t> y_;
  std::vector<std::uint32_t> row_docs_;
  std::vector<std::int32_t> row_of_doc_;
  std::vector<std::uint32_t> all_rows_;
  std::vector<double> intercept_effect_;

  double intercept_ = 0.0;
  std::vector<Feature> features_;
  std::unordered_map<PhraseIds, std::size_t, PhraseIdsHash> slot_of_;
  std::vector<double> margins_;
  double loss_ = 0.0;

  std::vector<TraceEntry> trace_;
  int iterations_ = 0;
  bool converged_ = false;
};

// Builds the index for (corpus, labeling, ban) and runs the descent.
ModelState fit(const Corpus& corpus, const Labeling& labeling,
               const BanList& ban, const FitConfig& config);

// Best phrase for the given model state, or nullopt when none offers
// descent.
std::optional<Phrase> find_highest_gradient(const ModelState& model,
                                            const PostingIndex& index,
                                            const Labeling& labeling,
                                            SearchMode mode =
                                                SearchMode::kPruned);

}  // namespace phrasereg

#endif  // PHRASEREG_SEARCH_HPP_
