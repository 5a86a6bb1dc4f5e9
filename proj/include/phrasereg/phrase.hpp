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

#ifndef PHRASEREG_PHRASE_HPP_
#define PHRASEREG_PHRASE_HPP_

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phrasereg {

// A token sequence in which some positions may be wildcard gaps. Each gap
// element matches exactly one arbitrary token.
//
// Phrases order canonically: shorter first, then element-wise with a gap
// sorting before any token and tokens compared bytewise.
class Phrase {
 public:
  static constexpr std::string_view kGapSymbol = "*";

  Phrase() = default;
  explicit Phrase(std::vector<std::optional<std::string>> elements)
      : elements_(std::move(elements)) {}
  static Phrase from_tokens(const std::vector<std::string>& tokens);

  // Parses the display form: space-separated tokens, "*" for a gap.
  static Phrase parse(std::string_view display);
  // Tokens joined by single spaces, gaps rendered as "*".
  std::string display() const;

  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }
  bool is_gap(std::size_t i) const { return !elements_[i].has_value(); }
  const std::string& token(std::size_t i) const { return *elements_[i]; }
  const std::vector<std::optional<std::string>>& elements() const {
    return elements_;
  }

  // First and last elements are tokens and the phrase is non-empty.
  bool well_formed() const;

  friend bool operator==(const Phrase&, const Phrase&) = default;
  friend std::strong_ordering operator<=>(const Phrase& a, const Phrase& b);

 private:
  std::vector<std::optional<std::string>> elements_;
};

}  // namespace phrasereg

#endif  // PHRASEREG_PHRASE_HPP_
