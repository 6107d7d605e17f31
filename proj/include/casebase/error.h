// Copyright 2026 The Casebase Authors.
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

#ifndef CASEBASE_ERROR_H_
#define CASEBASE_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace casebase {

enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kUnsupported,
  kNotFound,
  kAlreadyExists,
  kFailedPrecondition,
  kUnorderable,
  kDataLoss,
  kUnavailable,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported as Error (or a subclass).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Syntax error in logical-form text. position is a byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(size_t position, const std::string &message)
      : Error(ErrorCode::kParse,
              "at offset " + std::to_string(position) + ": " + message),
        position_(position),
        detail_(message) {}

  size_t position() const { return position_; }
  const std::string &detail() const { return detail_; }

 private:
  size_t position_;
  std::string detail_;
};

}  // namespace casebase

#endif  // CASEBASE_ERROR_H_
