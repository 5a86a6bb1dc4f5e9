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

#include "phrasereg/corpus.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "phrasereg/porter_stemmer.hpp"

namespace phrasereg {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kInvalidUtf8: return "invalid-utf8";
    case ErrorKind::kEmptyCorpus: return "empty-corpus";
    case ErrorKind::kLengthMismatch: return "length-mismatch";
    case ErrorKind::kInvalidValue: return "invalid-value";
    case ErrorKind::kDegenerateLabeling: return "degenerate-labeling";
    case ErrorKind::kVacuousFeature: return "vacuous-feature";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kStemMismatch: return "stem-mismatch";
    case ErrorKind::kCorpusMismatch: return "corpus-mismatch";
    case ErrorKind::kFoldMissingClass: return "fold-missing-class";
    case ErrorKind::kSingleClass: return "single-class";
  }
  return "unknown";
}

namespace {

enum class CodePointClass { kKeep, kSpace, kDrop, kDigit };

CodePointClass classify(UChar32 c) {
  if (c >= '0' && c <= '9') return CodePointClass::kDigit;
  if (c == '-') return CodePointClass::kSpace;
  if (u_isUWhiteSpace(c)) return CodePointClass::kSpace;
  switch (u_charType(c)) {
    case U_DASH_PUNCTUATION:
    case U_CONTROL_CHAR:
    case U_LINE_SEPARATOR:
    case U_PARAGRAPH_SEPARATOR:
    case U_SPACE_SEPARATOR:
      return CodePointClass::kSpace;
    case U_CONNECTOR_PUNCTUATION:
    case U_START_PUNCTUATION:
    case U_END_PUNCTUATION:
    case U_INITIAL_PUNCTUATION:
    case U_FINAL_PUNCTUATION:
    case U_OTHER_PUNCTUATION:
    case U_MATH_SYMBOL:
    case U_CURRENCY_SYMBOL:
    case U_MODIFIER_SYMBOL:
    case U_OTHER_SYMBOL:
    case U_FORMAT_CHAR:
      return CodePointClass::kDrop;
    default:
      return CodePointClass::kKeep;
  }
}

void append_utf8(std::string& out, UChar32 c) {
  char buffer[U8_MAX_LENGTH];
  int32_t length = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buffer), length, U8_MAX_LENGTH, c,
            error);
  if (!error) out.append(buffer, static_cast<std::size_t>(length));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, fmt::format("cannot open '{}'", path.string()));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw Error(ErrorKind::kIo, fmt::format("cannot read '{}'", path.string()));
  }
  return std::move(buffer).str();
}

std::vector<Document> tokenize_all(std::span<const std::string> raw_texts) {
  std::vector<Document> documents;
  documents.reserve(raw_texts.size());
  for (std::size_t i = 0; i < raw_texts.size(); ++i) {
    Document doc;
    doc.id = i;
    doc.tokens = tokenize(clean_text(raw_texts[i]));
    doc.surface = doc.tokens;
    documents.push_back(std::move(doc));
  }
  return documents;
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) return false;
  }
  return true;
}

std::string clean_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  const auto* bytes = reinterpret_cast<const uint8_t*>(raw.data());
  const auto length = static_cast<int32_t>(raw.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) continue;
    switch (classify(c)) {
      case CodePointClass::kDrop:
        continue;
      case CodePointClass::kSpace:
        pending_space = true;
        continue;
      case CodePointClass::kDigit:
        c = kDigitMarker;
        break;
      case CodePointClass::kKeep:
        if (c != kDigitMarker) c = u_tolower(c);
        break;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    append_utf8(out, c);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view cleaned) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < cleaned.size()) {
    std::size_t end = cleaned.find(' ', start);
    if (end == std::string_view::npos) end = cleaned.size();
    if (end > start) tokens.emplace_back(cleaned.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

Corpus::Corpus(std::vector<Document> documents, bool stemmed)
    : documents_(std::move(documents)), stemmed_(stemmed) {
  if (documents_.empty()) {
    throw Error(ErrorKind::kEmptyCorpus, "corpus has zero documents");
  }
  for (const Document& doc : documents_) {
    for (const std::string& token : doc.tokens) ++vocabulary_[token];
  }
}

Corpus Corpus::from_texts(std::span<const std::string> raw_texts) {
  return Corpus(tokenize_all(raw_texts), false);
}

Corpus Corpus::from_tokens(std::vector<std::vector<std::string>> documents) {
  std::vector<Document> docs;
  docs.reserve(documents.size());
  for (std::size_t i = 0; i < documents.size(); ++i) {
    Document doc;
    doc.id = i;
    doc.surface = documents[i];
    doc.tokens = std::move(documents[i]);
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs), false);
}

Corpus stem_corpus(const Corpus& corpus) {
  if (corpus.stemmed()) {
    throw Error(ErrorKind::kInvalidArgument, "corpus is already stemmed");
  }
  std::map<std::string, std::string> cache;
  std::vector<Document> documents = corpus.documents();
  for (Document& doc : documents) {
    for (std::string& token : doc.tokens) {
      auto [it, inserted] = cache.try_emplace(token);
      if (inserted) it->second = stem_token(token);
      token = it->second;
    }
  }
  return Corpus(std::move(documents), true);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string_view line(content.data() + start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!is_valid_utf8(line)) {
      throw Error(ErrorKind::kInvalidUtf8,
                  fmt::format("{}:{}: invalid UTF-8", path.string(),
                              lines.size() + 1));
    }
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> read_documents(const std::filesystem::path& path) {
  std::vector<std::string> texts;
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::string content = read_file(file);
      if (!is_valid_utf8(content)) {
        throw Error(ErrorKind::kInvalidUtf8,
                    fmt::format("{}: invalid UTF-8", file.string()));
      }
      texts.push_back(std::move(content));
    }
  } else {
    texts = read_lines(path);
  }
  return texts;
}

Corpus load_corpus(const std::filesystem::path& path, bool stem) {
  const std::vector<std::string> texts = read_documents(path);
  if (texts.empty()) {
    throw Error(ErrorKind::kEmptyCorpus, "corpus has zero documents");
  }
  Corpus corpus = Corpus::from_texts(texts);
  return stem ? stem_corpus(corpus) : corpus;
}

Labeling validate_labeling(std::size_t document_count,
                           std::span<const int> labels) {
  if (labels.size() != document_count) {
    throw Error(ErrorKind::kLengthMismatch,
                fmt::format("labeling has {} entries but corpus has {} "
                            "documents",
                            labels.size(), document_count));
  }
  Labeling labeling;
  labeling.values_.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int value = labels[i];
    if (value < -1 || value > 1) {
      throw Error(ErrorKind::kInvalidValue,
                  fmt::format("label {} at position {} is not in {{-1,0,1}}",
                              value, i + 1));
    }
    if (value == 1) ++labeling.positive_count_;
    if (value == -1) ++labeling.negative_count_;
    labeling.values_.push_back(static_cast<std::int8_t>(value));
  }
  if (labeling.positive_count_ == 0 || labeling.negative_count_ == 0) {
    throw Error(ErrorKind::kDegenerateLabeling,
                fmt::format("labeling needs both classes (got {} positive, "
                            "{} negative)",
                            labeling.positive_count_,
                            labeling.negative_count_));
  }
  return labeling;
}

Labeling validate_labeling(const Corpus& corpus, std::span<const int> labels) {
  return validate_labeling(corpus.size(), labels);
}

std::vector<int> load_labels(const std::filesystem::path& path) {
  std::vector<int> labels;
  const std::vector<std::string> lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) {
      line.remove_prefix(1);
    }
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) {
      line.remove_suffix(1);
    }
    if (!line.empty() && line.front() == '+') line.remove_prefix(1);
    int value = 0;
    const auto [ptr, ec] =
        std::from_chars(line.data(), line.data() + line.size(), value);
    if (line.empty() || ec != std::errc() || ptr != line.data() + line.size()) {
      throw Error(ErrorKind::kInvalidValue,
                  fmt::format("{}:{}: '{}' is not an integer label",
                              path.string(), i + 1, lines[i]));
    }
    if (value < -1 || value > 1) {
      throw Error(ErrorKind::kInvalidValue,
                  fmt::format("{}:{}: label {} is not in {{-1,0,1}}",
                              path.string(), i + 1, value));
    }
    labels.push_back(value);
  }
  return labels;
}

BanList make_ban_list(std::span<const std::string> entries, bool stem) {
  BanList ban;
  for (const std::string& entry : entries) {
    std::istringstream pieces(entry);
    std::string piece;
    while (pieces >> piece) {
      // An entry already in stemmed form ("clean+") is taken as is.
      const bool pre_stemmed =
          stem && piece.size() > 1 && piece.back() == kStemMarker;
      if (pre_stemmed) piece.pop_back();
      for (std::string& token : tokenize(clean_text(piece))) {
        if (stem) {
          token = pre_stemmed ? token + kStemMarker : stem_token(token);
        }
        ban.words.insert(std::move(token));
      }
    }
  }
  return ban;
}

BanList load_ban_list(const std::filesystem::path& path, bool stem) {
  return make_ban_list(read_lines(path), stem);
}

}  // namespace phrasereg
