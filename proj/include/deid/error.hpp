// Copyright 2026 The Deid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deid {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidCode,
  kValidation,
  kInsufficientPopulation,
  kScheduleMismatch,
  kMixedHierarchy,
  kInconsistency,
  kAlignment,
  kIo,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidCode: return "invalid-code";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kInsufficientPopulation: return "insufficient-population";
    case ErrorCode::kScheduleMismatch: return "schedule-mismatch";
    case ErrorCode::kMixedHierarchy: return "mixed-hierarchy";
    case ErrorCode::kInconsistency: return "inconsistency";
    case ErrorCode::kAlignment: return "alignment";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

/// All library failures are reported through this exception type. The code
/// lets callers (the CLI in particular) map failures onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace deid
