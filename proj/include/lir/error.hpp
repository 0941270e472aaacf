// Copyright 2026 The LIR Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lir {

enum class ErrorCode {
  kInvalidMatrix,
  kNumericalFailure,
  kDimensionError,
  kZeroVector,
  kRankError,
  kLanguageMismatch,
  kMissingBasis,
  kNoRelevant,
  kDegenerateLabels,
  kConfigError,
  kFormatError,
  kTruncatedFile,
  kCorruptBasis,
  kParseError,
  kDuplicateKey,
  kInvalidData,
  kIoError,
};

/// Stable name of an error code, e.g. "RankError". Used in CLI messages.
std::string_view error_name(ErrorCode code);

/// Structured error raised by every module. `line()` is set for errors that
/// originate from a specific line of a text input; `iterations()` is set for
/// convergence failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  static Error at_line(ErrorCode code, std::size_t line, const std::string& message);
  static Error numerical(std::size_t iterations, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  std::optional<std::size_t> iterations() const noexcept { return iterations_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
  std::optional<std::size_t> iterations_;
};

}  // namespace lir
