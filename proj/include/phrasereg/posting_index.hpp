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

// Positional index over a corpus and the on-demand phrase feature generator.
//
// A phrase is grown one concrete token at a time. With a gap window of g, a
// child may also insert a run of 1..g wildcard elements before its new
// token. Matching never crosses a document boundary, overlapping matches are
// all counted, and a wildcard may stand for any token (banned ones
// included); only the concrete tokens of a phrase are subject to the ban
// list.

#ifndef PHRASEREG_POSTING_INDEX_HPP_
#define PHRASEREG_POSTING_INDEX_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phrasereg/corpus.hpp"
#include "phrasereg/phrase.hpp"

namespace phrasereg {

using TokenId = std::int32_t;
inline constexpr TokenId kGapToken = -1;

// Phrase over token ids. Token ids follow the bytewise order of the token
// strings, so canonical_less agrees with Phrase ordering.
using PhraseIds = std::vector<TokenId>;

bool canonical_less(const PhraseIds& a, const PhraseIds& b);

struct PhraseIdsHash {
  std::size_t operator()(const PhraseIds& ids) const noexcept;
};

// One match of a phrase: the document and the token index of its last
// element.
struct Occurrence {
  std::uint32_t doc = 0;
  std::uint32_t end = 0;

  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

// Matches of a phrase, sorted by (doc, end). The count of the phrase in a
// document is the number of entries for that document.
class OccurrenceList {
 public:
  struct DocumentCount {
    std::uint32_t doc = 0;
    std::uint32_t count = 0;
  };

  OccurrenceList() = default;
  explicit OccurrenceList(std::vector<Occurrence> entries);

  std::span<const Occurrence> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  // Total number of matches across documents.
  std::size_t total() const { return entries_.size(); }
  std::size_t document_count() const;
  std::vector<DocumentCount> counts() const;
  std::vector<std::uint32_t> end_positions(std::uint32_t doc) const;

  // Calls f(doc, count) once per document, in document order.
  template <typename F>
  void for_each_document(F&& f) const {
    std::size_t i = 0;
    while (i < entries_.size()) {
      const std::uint32_t doc = entries_[i].doc;
      std::size_t j = i + 1;
      while (j < entries_.size() && entries_[j].doc == doc) ++j;
      f(doc, static_cast<std::uint32_t>(j - i));
      i = j;
    }
  }

  friend bool operator==(const OccurrenceList&,
                         const OccurrenceList&) = default;

 private:
  std::vector<Occurrence> entries_;
};

struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<double> value;
};

// Per-document counts, or 0/1 presence indicators when `binary` is set.
SparseVector count_vector(const OccurrenceList& occurrences, bool binary);

class PostingIndex {
 public:
  // Indexes the documents with a non-zero label. Banned tokens keep their
  // place in the token streams but get no postings.
  static PostingIndex build(const Corpus& corpus, const Labeling& labeling,
                            const BanList& ban);
  // Indexes every document.
  static PostingIndex build(const Corpus& corpus, const BanList& ban = {});

  std::size_t document_count() const { return streams_.size(); }
  bool included(std::size_t doc) const { return included_[doc] != 0; }

  std::size_t vocabulary_size() const { return dictionary_.size(); }
  std::optional<TokenId> find(std::string_view token) const;
  const std::string& token(TokenId id) const {
    return dictionary_[static_cast<std::size_t>(id)];
  }
  bool banned(TokenId id) const {
    return banned_[static_cast<std::size_t>(id)] != 0;
  }

  // Unigram matches; empty for banned tokens.
  std::span<const Occurrence> postings(TokenId id) const {
    return postings_[static_cast<std::size_t>(id)];
  }
  // Tokens with at least one posting, ascending.
  const std::vector<TokenId>& unigrams() const { return unigrams_; }

  // Token ids of a document; empty for excluded documents.
  std::span<const TokenId> stream(std::size_t doc) const {
    return streams_[doc];
  }

  // nullopt when some token of the phrase is not in the corpus.
  std::optional<PhraseIds> resolve(const Phrase& phrase) const;
  Phrase to_phrase(const PhraseIds& ids) const;

 private:
  PostingIndex(const Corpus& corpus, std::vector<char> included,
               const BanList& ban);

  std::vector<std::string> dictionary_;
  std::unordered_map<std::string, TokenId> lookup_;
  std::vector<char> banned_;
  std::vector<char> included_;
  std::vector<std::vector<TokenId>> streams_;
  std::vector<std::vector<Occurrence>> postings_;
  std::vector<TokenId> unigrams_;
};

// Matches a phrase from scratch. The first element must be a token.
OccurrenceList occurrences(const PhraseIds& phrase, const PostingIndex& index);
OccurrenceList occurrences(const Phrase& phrase, const PostingIndex& index);

struct ExpansionLimits {
  int gap = 0;
  int min_support = 1;
  int max_pattern = 100;
};

struct ChildPhrase {
  PhraseIds phrase;
  OccurrenceList occurrences;
};

// Children of `parent` whose matches extend the parent's matches, in
// canonical order. Children with fewer than min_support matches, longer than
// max_pattern, or ending in a banned token are left out.
std::vector<ChildPhrase> expand(const PhraseIds& parent,
                                const OccurrenceList& parent_occurrences,
                                const PostingIndex& index,
                                const ExpansionLimits& limits);

std::vector<Phrase> children(const Phrase& parent, const PostingIndex& index,
                             const ExpansionLimits& limits);

}  // namespace phrasereg

#endif  // PHRASEREG_POSTING_INDEX_HPP_
