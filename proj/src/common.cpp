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

#include "fairaudit/common.hpp"

namespace fairaudit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownColumn: return "UnknownColumn";
    case ErrorCode::kBadCell: return "BadCell";
    case ErrorCode::kRoleConflict: return "RoleConflict";
    case ErrorCode::kBadSchema: return "BadSchema";
    case ErrorCode::kDegenerateSplit: return "DegenerateSplit";
    case ErrorCode::kBadColumn: return "BadColumn";
    case ErrorCode::kNoTimeColumn: return "NoTimeColumn";
    case ErrorCode::kEmptyTraining: return "EmptyTraining";
    case ErrorCode::kArityMismatch: return "ArityMismatch";
    case ErrorCode::kEmptyScores: return "EmptyScores";
    case ErrorCode::kBadBand: return "BadBand";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kUnknownGroup: return "UnknownGroup";
    case ErrorCode::kTooFewCalibration: return "TooFewCalibration";
    case ErrorCode::kSplitOverlap: return "SplitOverlap";
    case ErrorCode::kBadAttribute: return "BadAttribute";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kTooFewPeriods: return "TooFewPeriods";
    case ErrorCode::kEmptyPeriod: return "EmptyPeriod";
    case ErrorCode::kBadConfig: return "BadConfig";
    case ErrorCode::kTooFewReplications: return "TooFewReplications";
    case ErrorCode::kEmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::kEmptySpec: return "EmptySpec";
    case ErrorCode::kBadModel: return "BadModel";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace fairaudit
