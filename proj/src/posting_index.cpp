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

#include "phrasereg/posting_index.hpp"

#include <algorithm>
#include <tuple>

namespace phrasereg {

bool canonical_less(const PhraseIds& a, const PhraseIds& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::size_t PhraseIdsHash::operator()(const PhraseIds& ids) const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ULL ^ ids.size();
  for (TokenId id : ids) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(id)) +
         0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

OccurrenceList::OccurrenceList(std::vector<Occurrence> entries)
    : entries_(std::move(entries)) {}

std::size_t OccurrenceList::document_count() const {
  std::size_t n = 0;
  for_each_document([&n](std::uint32_t, std::uint32_t) { ++n; });
  return n;
}

std::vector<OccurrenceList::DocumentCount> OccurrenceList::counts() const {
  std::vector<DocumentCount> out;
  for_each_document([&out](std::uint32_t doc, std::uint32_t count) {
    out.push_back({doc, count});
  });
  return out;
}

std::vector<std::uint32_t> OccurrenceList::end_positions(
    std::uint32_t doc) const {
  std::vector<std::uint32_t> out;
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), doc,
      [](const Occurrence& o, std::uint32_t d) { return o.doc < d; });
  for (; it != entries_.end() && it->doc == doc; ++it) out.push_back(it->end);
  return out;
}

SparseVector count_vector(const OccurrenceList& occurrences, bool binary) {
  SparseVector v;
  occurrences.for_each_document([&](std::uint32_t doc, std::uint32_t count) {
    v.index.push_back(doc);
    v.value.push_back(binary ? 1.0 : static_cast<double>(count));
  });
  return v;
}

PostingIndex::PostingIndex(const Corpus& corpus, std::vector<char> included,
                           const BanList& ban)
    : included_(std::move(included)) {
  dictionary_.reserve(corpus.vocabulary().size());
  for (const auto& [token, count] : corpus.vocabulary()) {
    lookup_.emplace(token, static_cast<TokenId>(dictionary_.size()));
    dictionary_.push_back(token);
    banned_.push_back(ban.contains(token) ? 1 : 0);
  }
  postings_.resize(dictionary_.size());
  streams_.resize(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (!included_[d]) continue;
    const auto& tokens = corpus[d].tokens;
    auto& stream = streams_[d];
    stream.reserve(tokens.size());
    for (std::size_t p = 0; p < tokens.size(); ++p) {
      const TokenId id = lookup_.at(tokens[p]);
      stream.push_back(id);
      if (!banned_[static_cast<std::size_t>(id)]) {
        postings_[static_cast<std::size_t>(id)].push_back(
            {static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(p)});
      }
    }
  }
  for (std::size_t id = 0; id < postings_.size(); ++id) {
    if (!postings_[id].empty()) unigrams_.push_back(static_cast<TokenId>(id));
  }
}

PostingIndex PostingIndex::build(const Corpus& corpus,
                                 const Labeling& labeling,
                                 const BanList& ban) {
  if (labeling.size() != corpus.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                "labeling length does not match corpus size");
  }
  std::vector<char> included(corpus.size());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    included[d] = labeling.included(d) ? 1 : 0;
  }
  return PostingIndex(corpus, std::move(included), ban);
}

PostingIndex PostingIndex::build(const Corpus& corpus, const BanList& ban) {
  return PostingIndex(corpus, std::vector<char>(corpus.size(), 1), ban);
}

std::optional<TokenId> PostingIndex::find(std::string_view token) const {
  auto it = lookup_.find(std::string(token));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<PhraseIds> PostingIndex::resolve(const Phrase& phrase) const {
  PhraseIds ids;
  ids.reserve(phrase.size());
  for (std::size_t i = 0; i < phrase.size(); ++i) {
    if (phrase.is_gap(i)) {
      ids.push_back(kGapToken);
      continue;
    }
    auto id = find(phrase.token(i));
    if (!id) return std::nullopt;
    ids.push_back(*id);
  }
  return ids;
}

Phrase PostingIndex::to_phrase(const PhraseIds& ids) const {
  std::vector<std::optional<std::string>> elements;
  elements.reserve(ids.size());
  for (TokenId id : ids) {
    if (id == kGapToken) {
      elements.emplace_back(std::nullopt);
    } else {
      elements.emplace_back(token(id));
    }
  }
  return Phrase(std::move(elements));
}

OccurrenceList occurrences(const PhraseIds& phrase, const PostingIndex& index) {
  if (phrase.empty() || phrase.front() == kGapToken) {
    throw Error(ErrorKind::kInvalidArgument,
                "a phrase must start with a token");
  }
  std::vector<Occurrence> matches;
  const std::size_t length = phrase.size();
  for (const Occurrence& start : index.postings(phrase.front())) {
    const auto stream = index.stream(start.doc);
    if (start.end + length > stream.size()) continue;
    bool ok = true;
    for (std::size_t i = 1; i < length && ok; ++i) {
      if (phrase[i] == kGapToken) continue;
      if (index.banned(phrase[i])) ok = false;
      if (stream[start.end + i] != phrase[i]) ok = false;
    }
    if (ok) {
      matches.push_back(
          {start.doc, static_cast<std::uint32_t>(start.end + length - 1)});
    }
  }
  return OccurrenceList(std::move(matches));
}

OccurrenceList occurrences(const Phrase& phrase, const PostingIndex& index) {
  if (!phrase.well_formed()) {
    throw Error(ErrorKind::kInvalidArgument,
                "phrase '" + phrase.display() +
                    "' must start and end with a token");
  }
  auto ids = index.resolve(phrase);
  if (!ids) return {};
  return occurrences(*ids, index);
}

std::vector<ChildPhrase> expand(const PhraseIds& parent,
                                const OccurrenceList& parent_occurrences,
                                const PostingIndex& index,
                                const ExpansionLimits& limits) {
  struct Extension {
    std::uint32_t skip;
    TokenId token;
    Occurrence occurrence;
  };
  std::vector<ChildPhrase> result;
  const auto parent_length = static_cast<long>(parent.size());
  const long max_skip =
      std::min<long>(limits.gap, limits.max_pattern - parent_length - 1);
  if (max_skip < 0) return result;

  std::vector<Extension> extensions;
  extensions.reserve(parent_occurrences.total() *
                     static_cast<std::size_t>(max_skip + 1));
  for (const Occurrence& occ : parent_occurrences.entries()) {
    const auto stream = index.stream(occ.doc);
    for (long skip = 0; skip <= max_skip; ++skip) {
      const std::size_t pos = occ.end + static_cast<std::size_t>(skip) + 1;
      if (pos >= stream.size()) break;
      const TokenId token = stream[pos];
      if (index.banned(token)) continue;
      extensions.push_back({static_cast<std::uint32_t>(skip), token,
                            {occ.doc, static_cast<std::uint32_t>(pos)}});
    }
  }
  // Stable sort keeps each group's (doc, end) order from the parent.
  std::stable_sort(extensions.begin(), extensions.end(),
                   [](const Extension& a, const Extension& b) {
                     return std::tie(a.skip, a.token) <
                            std::tie(b.skip, b.token);
                   });

  std::size_t i = 0;
  while (i < extensions.size()) {
    std::size_t j = i + 1;
    while (j < extensions.size() && extensions[j].skip == extensions[i].skip &&
           extensions[j].token == extensions[i].token) {
      ++j;
    }
    if (j - i >= static_cast<std::size_t>(std::max(limits.min_support, 1))) {
      ChildPhrase child;
      child.phrase = parent;
      child.phrase.insert(child.phrase.end(), extensions[i].skip, kGapToken);
      child.phrase.push_back(extensions[i].token);
      std::vector<Occurrence> entries;
      entries.reserve(j - i);
      for (std::size_t k = i; k < j; ++k) {
        entries.push_back(extensions[k].occurrence);
      }
      child.occurrences = OccurrenceList(std::move(entries));
      result.push_back(std::move(child));
    }
    i = j;
  }
  return result;
}

std::vector<Phrase> children(const Phrase& parent, const PostingIndex& index,
                             const ExpansionLimits& limits) {
  std::vector<Phrase> result;
  auto ids = index.resolve(parent);
  if (!ids) return result;
  const OccurrenceList occ = occurrences(*ids, index);
  for (const ChildPhrase& child : expand(*ids, occ, index, limits)) {
    result.push_back(index.to_phrase(child.phrase));
  }
  return result;
}

}  // namespace phrasereg
