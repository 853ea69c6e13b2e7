// Copyright 2026 The WMPlan Authors
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

#ifndef WMPLAN_ERROR_H_
#define WMPLAN_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace wmplan {

// Every domain failure in the library is reported as an Error carrying one of
// these codes. Usage errors (bad CLI flags) are handled by the CLI layer.
enum class ErrorCode {
  // trajectory
  kUnbalancedTag,
  kEmptyGoal,
  kStateWithoutAction,
  kDuplicateBlock,
  kPrefixOutOfRange,
  kTooFewSteps,
  kInvalidTrajectory,
  // segtree
  kBadHeader,
  kDimMismatch,
  kNonMonotonic,
  kBadRow,
  kEmptyStream,
  kBadTree,
  // refine
  kGenerationFailed,
  kUnparseableResponse,
  kMissingKey,
  kInvalidExtraction,
  // critic
  kRemoteUnavailable,
  kNoDistractorSource,
  kBadModel,
  // planner
  kWorldModelFailure,
  kNoCandidates,
  kPreconditionUnmet,
  kUnknownAction,
  kBadConfig,
  // evalharness
  kLengthMismatch,
  kEmptyInput,
  // arena
  kExhausted,
  kUnknownBattle,
  kInvalidWinner,
  kDuplicateSubmission,
  kDegenerateMarginals,
  kPreconditionViolated,
  // io
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wmplan

#endif  // WMPLAN_ERROR_H_
