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

#include "phrasereg/phrase.hpp"

namespace phrasereg {

Phrase Phrase::from_tokens(const std::vector<std::string>& tokens) {
  std::vector<std::optional<std::string>> elements(tokens.begin(),
                                                   tokens.end());
  return Phrase(std::move(elements));
}

Phrase Phrase::parse(std::string_view display) {
  std::vector<std::optional<std::string>> elements;
  std::size_t start = 0;
  while (start < display.size()) {
    std::size_t end = display.find(' ', start);
    if (end == std::string_view::npos) end = display.size();
    if (end > start) {
      const std::string_view piece = display.substr(start, end - start);
      if (piece == kGapSymbol) {
        elements.emplace_back(std::nullopt);
      } else {
        elements.emplace_back(std::string(piece));
      }
    }
    start = end + 1;
  }
  return Phrase(std::move(elements));
}

std::string Phrase::display() const {
  std::string out;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (i > 0) out.push_back(' ');
    if (elements_[i]) {
      out += *elements_[i];
    } else {
      out += kGapSymbol;
    }
  }
  return out;
}

bool Phrase::well_formed() const {
  return !elements_.empty() && elements_.front().has_value() &&
         elements_.back().has_value();
}

std::strong_ordering operator<=>(const Phrase& a, const Phrase& b) {
  if (a.size() != b.size()) return a.size() <=> b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool a_gap = a.is_gap(i);
    const bool b_gap = b.is_gap(i);
    if (a_gap != b_gap) {
      return a_gap ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    if (a_gap) continue;
    const int c = a.token(i).compare(b.token(i));
    if (c != 0) {
      return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
    }
  }
  return std::strong_ordering::equal;
}

}  // namespace phrasereg
