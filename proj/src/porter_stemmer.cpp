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

#include "phrasereg/porter_stemmer.hpp"

#include <array>
#include <utility>

namespace phrasereg {
namespace {

// Works on b[0..k] in place. `j` marks the end of the stem once a suffix has
// been matched by ends().
class Stemmer {
 public:
  explicit Stemmer(std::string_view word)
      : b_(word), k_(static_cast<int>(word.size()) - 1) {}

  std::string run() {
    if (k_ < 0) return b_;
    step1ab();
    if (k_ > 0) {
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    return b_.substr(0, static_cast<std::size_t>(k_ + 1));
  }

 private:
  bool cons(int i) const {
    switch (b_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of consonant-vowel sequences in b[0..j]: [C](VC)^m[V].
  int measure() const {
    int n = 0;
    int i = 0;
    while (true) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j_; ++i) {
      if (!cons(i)) return true;
    }
    return false;
  }

  bool double_consonant(int i) const {
    if (i < 1) return false;
    if (b_[i] != b_[i - 1]) return false;
    return cons(i);
  }

  // consonant-vowel-consonant ending at i, the last not w, x or y.
  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    const char ch = b_[i];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(std::string_view suffix) {
    const int length = static_cast<int>(suffix.size());
    if (length > k_ + 1) return false;
    if (std::string_view(b_).substr(static_cast<std::size_t>(k_ - length + 1),
                                    suffix.size()) != suffix) {
      return false;
    }
    j_ = k_ - length;
    return true;
  }

  void set_to(std::string_view s) {
    b_.replace(static_cast<std::size_t>(j_ + 1),
               static_cast<std::size_t>(k_ - j_), s);
    k_ = j_ + static_cast<int>(s.size());
    b_.resize(static_cast<std::size_t>(k_ + 1));
  }

  void replace_if_measured(std::string_view s) {
    if (measure() > 0) set_to(s);
  }

  // Tries each (suffix, replacement) pair; the first matching suffix wins
  // whether or not its condition holds.
  template <std::size_t N>
  void rule_table(
      const std::array<std::pair<std::string_view, std::string_view>, N>&
          rules) {
    for (const auto& [suffix, replacement] : rules) {
      if (ends(suffix)) {
        replace_if_measured(replacement);
        return;
      }
    }
  }

  void step1ab() {
    if (b_[k_] == 's') {
      if (ends("sses")) {
        k_ -= 2;
      } else if (ends("ies")) {
        set_to("i");
      } else if (b_[k_ - 1] != 's') {
        --k_;
      }
      b_.resize(static_cast<std::size_t>(k_ + 1));
    }
    if (ends("eed")) {
      if (measure() > 0) --k_;
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      k_ = j_;
      b_.resize(static_cast<std::size_t>(k_ + 1));
      if (ends("at")) {
        set_to("ate");
      } else if (ends("bl")) {
        set_to("ble");
      } else if (ends("iz")) {
        set_to("ize");
      } else if (double_consonant(k_)) {
        --k_;
        const char ch = b_[k_];
        if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
      } else {
        j_ = k_;
        if (measure() == 1 && cvc(k_)) {
          j_ = k_;
          set_to("e");
        }
      }
    }
    b_.resize(static_cast<std::size_t>(k_ + 1));
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_[k_] = 'i';
  }

  void step2() {
    static constexpr std::array<std::pair<std::string_view, std::string_view>,
                                20>
        kRules = {{{"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},
                   {"anci", "ance"},   {"izer", "ize"},    {"abli", "able"},
                   {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},
                   {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
                   {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"},
                   {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},
                   {"iviti", "ive"},   {"biliti", "ble"}}};
    if (k_ < 1) return;
    rule_table(kRules);
  }

  void step3() {
    static constexpr std::array<std::pair<std::string_view, std::string_view>,
                                7>
        kRules = {{{"icate", "ic"},
                   {"ative", ""},
                   {"alize", "al"},
                   {"iciti", "ic"},
                   {"ical", "ic"},
                   {"ful", ""},
                   {"ness", ""}}};
    rule_table(kRules);
  }

  void step4() {
    static constexpr std::array<std::string_view, 19> kSuffixes = {
        "al",  "ance", "ence", "er",  "ic",  "able", "ible",
        "ant", "ement", "ment", "ent", "ion", "ou",   "ism",
        "ate", "iti",  "ous",  "ive", "ize"};
    for (std::string_view suffix : kSuffixes) {
      if (!ends(suffix)) continue;
      if (suffix == "ion" &&
          (j_ < 0 || (b_[j_] != 's' && b_[j_] != 't'))) {
        return;
      }
      if (measure() > 1) {
        k_ = j_;
        b_.resize(static_cast<std::size_t>(k_ + 1));
      }
      return;
    }
  }

  void step5() {
    j_ = k_;
    if (b_[k_] == 'e') {
      const int m = measure();
      if (m > 1 || (m == 1 && !cvc(k_ - 1))) --k_;
    }
    if (b_[k_] == 'l' && double_consonant(k_)) {
      j_ = k_;
      if (measure() > 1) --k_;
    }
    b_.resize(static_cast<std::size_t>(k_ + 1));
  }

  std::string b_;
  int k_;
  int j_ = 0;
};

}  // namespace

std::string porter_stem(std::string_view word) {
  return Stemmer(word).run();
}

std::string stem_token(std::string_view word) {
  std::string stem = porter_stem(word);
  if (stem.empty()) stem = word;
  return stem + '+';
}

}  // namespace phrasereg
