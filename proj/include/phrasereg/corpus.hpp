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

// Text ingestion: cleaning, tokenization, optional stemming, labelings and
// ban lists.
//
// Cleaning rules, applied per code point:
//   - dash punctuation (the ASCII hyphen and Unicode Pd) becomes a space;
//   - ASCII digits become the marker 'X';
//   - remaining punctuation (P*) and symbols (S*) are dropped;
//   - whitespace and control characters become a space;
//   - everything else is lowercased, except the marker 'X' itself, which is
//     left untouched so that cleaning is idempotent.
// Runs of spaces are then collapsed and the ends trimmed.

#ifndef PHRASEREG_CORPUS_HPP_
#define PHRASEREG_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phrasereg/error.hpp"

namespace phrasereg {

inline constexpr char kDigitMarker = 'X';
inline constexpr char kStemMarker = '+';

// Input must be valid UTF-8; invalid bytes are dropped.
std::string clean_text(std::string_view raw);

// Splits cleaned text on spaces. Never yields empty tokens.
std::vector<std::string> tokenize(std::string_view cleaned);

// Returns true iff `text` is well-formed UTF-8.
bool is_valid_utf8(std::string_view text);

struct Document {
  std::size_t id = 0;
  // Tokens used for matching (stemmed when the corpus is stemmed).
  std::vector<std::string> tokens;
  // Cleaned tokens before stemming, position-aligned with `tokens`.
  std::vector<std::string> surface;
};

class Corpus {
 public:
  // Cleans and tokenizes each raw text. Throws kEmptyCorpus for no texts.
  static Corpus from_texts(std::span<const std::string> raw_texts);

  // Builds from already-tokenized documents (tokens are taken verbatim).
  static Corpus from_tokens(std::vector<std::vector<std::string>> documents);

  std::size_t size() const { return documents_.size(); }
  const Document& operator[](std::size_t i) const { return documents_[i]; }
  const std::vector<Document>& documents() const { return documents_; }

  // Token -> total number of occurrences.
  const std::map<std::string, std::size_t>& vocabulary() const {
    return vocabulary_;
  }
  bool stemmed() const { return stemmed_; }

 private:
  friend Corpus stem_corpus(const Corpus& corpus);

  Corpus(std::vector<Document> documents, bool stemmed);

  std::vector<Document> documents_;
  std::map<std::string, std::size_t> vocabulary_;
  bool stemmed_ = false;
};

// Replaces every token with its Porter stem followed by '+'. Rejects corpora
// that are already stemmed.
Corpus stem_corpus(const Corpus& corpus);

// Raw documents of a corpus file (one per line) or a directory (one per
// regular file, in lexicographic file-name order).
std::vector<std::string> read_documents(const std::filesystem::path& path);

// read_documents, then clean, tokenize and optionally stem.
Corpus load_corpus(const std::filesystem::path& path, bool stem);

// Reads LF-delimited lines (a trailing CR is stripped). Invalid UTF-8 is
// reported as kInvalidUtf8 with the 1-based line number.
std::vector<std::string> read_lines(const std::filesystem::path& path);

class Labeling {
 public:
  Labeling() = default;

  std::size_t size() const { return values_.size(); }
  int operator[](std::size_t i) const { return values_[i]; }
  std::span<const std::int8_t> values() const { return values_; }
  bool included(std::size_t i) const { return values_[i] != 0; }

  std::size_t positive_count() const { return positive_count_; }
  std::size_t negative_count() const { return negative_count_; }
  std::size_t included_count() const {
    return positive_count_ + negative_count_;
  }

 private:
  friend Labeling validate_labeling(const Corpus& corpus,
                                    std::span<const int> labels);
  friend Labeling validate_labeling(std::size_t document_count,
                                    std::span<const int> labels);

  std::vector<std::int8_t> values_;
  std::size_t positive_count_ = 0;
  std::size_t negative_count_ = 0;
};

// Throws kLengthMismatch, kInvalidValue or kDegenerateLabeling.
Labeling validate_labeling(const Corpus& corpus, std::span<const int> labels);
Labeling validate_labeling(std::size_t document_count,
                           std::span<const int> labels);

// One integer per line; blank lines are rejected.
std::vector<int> load_labels(const std::filesystem::path& path);

struct BanList {
  std::set<std::string> words;

  bool contains(std::string_view token) const {
    return words.find(std::string(token)) != words.end();
  }
};

// Cleans each entry (an entry may yield several tokens) and, when `stem` is
// set, stems them so either the surface or the stemmed form may be given.
BanList make_ban_list(std::span<const std::string> entries, bool stem);
BanList load_ban_list(const std::filesystem::path& path, bool stem);

}  // namespace phrasereg

#endif  // PHRASEREG_CORPUS_HPP_
