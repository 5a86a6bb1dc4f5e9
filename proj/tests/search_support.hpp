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

// Helpers shared by the search tests and the acceptance suite.

#ifndef PHRASEREG_TESTS_SEARCH_SUPPORT_HPP_
#define PHRASEREG_TESTS_SEARCH_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <utility>
#include <vector>

#include "phrasereg/objective.hpp"
#include "phrasereg/posting_index.hpp"
#include "phrasereg/search.hpp"

namespace testing {

// Every phrase reachable from the unigrams, in breadth-first order.
inline std::vector<std::pair<phrasereg::PhraseIds, phrasereg::OccurrenceList>>
all_phrases(const phrasereg::PostingIndex& index,
            const phrasereg::ExpansionLimits& limits) {
  using namespace phrasereg;
  std::vector<std::pair<PhraseIds, OccurrenceList>> out;
  std::deque<std::pair<PhraseIds, OccurrenceList>> queue;
  for (TokenId u : index.unigrams()) {
    const auto p = index.postings(u);
    if (p.size() < static_cast<std::size_t>(limits.min_support)) continue;
    queue.emplace_back(PhraseIds{u},
                       OccurrenceList(std::vector<Occurrence>(p.begin(), p.end())));
  }
  while (!queue.empty()) {
    auto node = std::move(queue.front());
    queue.pop_front();
    for (ChildPhrase& c : expand(node.first, node.second, index, limits)) {
      queue.emplace_back(std::move(c.phrase), std::move(c.occurrences));
    }
    out.push_back(std::move(node));
  }
  return out;
}

// Puts a random sparse model into the trainer.
inline void randomize(
    phrasereg::Trainer& trainer,
    const std::vector<std::pair<phrasereg::PhraseIds, phrasereg::OccurrenceList>>&
        phrases,
    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  std::uniform_int_distribution<int> how_many(0, 4);
  std::vector<std::pair<phrasereg::PhraseIds, double>> coefficients;
  if (!phrases.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, phrases.size() - 1);
    const int k = how_many(rng);
    for (int i = 0; i < k; ++i) {
      const auto& ids = phrases[pick(rng)].first;
      bool seen = false;
      for (const auto& c : coefficients) seen |= c.first == ids;
      if (seen) continue;
      double b = coef(rng);
      if (trainer.config().penalty.positive_only) b = std::abs(b);
      coefficients.emplace_back(ids, b);
    }
  }
  trainer.assign(coef(rng) * 0.5, coefficients);
}

// Largest amount by which a phrase's at-zero descent magnitude exceeds the
// prune bound of one of its ancestors; <= 0 when the bound holds.
inline double worst_bound_excess(
    const phrasereg::Trainer& trainer,
    const phrasereg::ExpansionLimits& limits) {
  using namespace phrasereg;
  const PostingIndex& index = trainer.index();
  struct Node {
    PhraseIds phrase;
    OccurrenceList occ;
    double ancestor_bound;
  };
  double worst = -INFINITY;
  std::deque<Node> queue;
  for (TokenId u : index.unigrams()) {
    const auto p = index.postings(u);
    if (p.size() < static_cast<std::size_t>(limits.min_support)) continue;
    OccurrenceList occ(std::vector<Occurrence>(p.begin(), p.end()));
    const double b = trainer.prune_bound_of(occ);
    queue.push_back({PhraseIds{u}, std::move(occ), b});
  }
  while (!queue.empty()) {
    Node node = std::move(queue.front());
    queue.pop_front();
    for (ChildPhrase& c : expand(node.phrase, node.occ, index, limits)) {
      const double magnitude = trainer.at_zero_magnitude(c.occurrences);
      worst = std::max(worst, magnitude - node.ancestor_bound);
      // The tightest ancestor bound is the one that matters.
      const double own = trainer.prune_bound_of(c.occurrences);
      worst = std::max(worst, magnitude - own);
      queue.push_back({std::move(c.phrase), std::move(c.occurrences),
                       std::min(node.ancestor_bound, own)});
    }
  }
  return worst;
}

inline bool same_candidate(const std::optional<phrasereg::Candidate>& a,
                           const std::optional<phrasereg::Candidate>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->phrase == b->phrase && a->magnitude == b->magnitude &&
         a->in_model == b->in_model;
}

inline bool trace_monotone(const phrasereg::ModelState& model,
                           double tolerance) {
  for (std::size_t t = 1; t < model.trace.size(); ++t) {
    if (model.trace[t].loss > model.trace[t - 1].loss + tolerance) return false;
  }
  return true;
}

}  // namespace testing

#endif  // PHRASEREG_TESTS_SEARCH_SUPPORT_HPP_
