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

#ifndef PHRASEREG_ERROR_HPP_
#define PHRASEREG_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace phrasereg {

enum class ErrorKind {
  kIo,
  kInvalidUtf8,
  kEmptyCorpus,
  kLengthMismatch,
  kInvalidValue,
  kDegenerateLabeling,
  kVacuousFeature,
  kInvalidArgument,
  kStemMismatch,
  kCorpusMismatch,
  kFoldMissingClass,
  kSingleClass,
};

// Stable machine-readable name, e.g. "degenerate-labeling".
std::string_view error_kind_name(ErrorKind kind);

// All library failures are reported through this exception. The message is
// a single line; kind() allows callers to branch without parsing it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace phrasereg

#endif  // PHRASEREG_ERROR_HPP_
