//
// Copyright 2026 The HTL Toolkit Authors
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
//

#ifndef HTL_ERROR_H_
#define HTL_ERROR_H_

#include <stdexcept>
#include <string>

namespace htl {

enum class ErrorCode {
  kDomain,               // argument outside the mathematical domain
  kInvalidArgument,      // shape mismatch or violated precondition
  kIo,                   // missing or unreadable file
  kRaggedRow,            // CSV row with the wrong number of cells
  kParse,                // CSV cell that is not a finite real
  kMissingColumn,        // requested label column absent from the header
  kSingular,             // inverse of G undefined at the given point
  kConditioning,         // factorization failed after jitter escalation
  kUndefinedStability,   // stability coefficients requested with lambda = 0
  kInsufficientData,     // too few rows/replicates for the operation
  kDegenerate,           // zero total sum of squares
  kConfig,               // inconsistent configuration
};

const char* ErrorCodeName(ErrorCode code);

// Every failure raised by the toolkit. The code distinguishes the
// diagnostics that callers (and the CLI) react to differently.
class HtlError : public std::runtime_error {
 public:
  HtlError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace htl

#endif  // HTL_ERROR_H_
