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

#ifndef PHRASEREG_PORTER_STEMMER_HPP_
#define PHRASEREG_PORTER_STEMMER_HPP_

#include <string>
#include <string_view>

namespace phrasereg {

// The original (1980) Porter suffix-stripping algorithm, applied to words of
// every length ("is" -> "i", "s" -> ""). Any byte other than a lowercase
// ASCII vowel is treated as a consonant, so the digit marker 'X' is a
// consonant.
std::string porter_stem(std::string_view word);

// porter_stem plus the '+' marker. A word that would stem to nothing keeps
// its spelling.
std::string stem_token(std::string_view word);

}  // namespace phrasereg

#endif  // PHRASEREG_PORTER_STEMMER_HPP_
