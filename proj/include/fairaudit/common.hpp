/*
 * Copyright 2026 The fairaudit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fairaudit {

// Every failure the library reports carries one of these codes. The CLI maps
// them onto exit codes.
enum class ErrorCode {
  kUnknownColumn,
  kBadCell,
  kRoleConflict,
  kBadSchema,
  kDegenerateSplit,
  kBadColumn,
  kNoTimeColumn,
  kEmptyTraining,
  kArityMismatch,
  kEmptyScores,
  kBadBand,
  kLengthMismatch,
  kUnknownGroup,
  kTooFewCalibration,
  kSplitOverlap,
  kBadAttribute,
  kTooFewRows,
  kTooFewPeriods,
  kEmptyPeriod,
  kBadConfig,
  kTooFewReplications,
  kEmptyAfterFilter,
  kEmptySpec,
  kBadModel,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A rate or score whose denominator may be zero. An empty value is the
// explicit "undefined" flag; it is never silently replaced by 0 or NaN.
using Rate = std::optional<double>;

inline Rate SafeRatio(double numerator, double denominator) {
  if (denominator == 0.0) return std::nullopt;
  return numerator / denominator;
}

}  // namespace fairaudit
