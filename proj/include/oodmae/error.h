// Copyright 2026 The oodmae Authors.
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

#ifndef OODMAE_ERROR_H_
#define OODMAE_ERROR_H_

#include <stdexcept>
#include <string>

namespace oodmae {

enum class ErrorCode {
  kShape,
  kValue,
  kConfig,
  kDecode,
  kEmptyCorpus,
  kEmptyStream,
  kContractViolation,
  kDivergence,
  kIo,
};

const char* ErrorCodeName(ErrorCode code);

// Base of every error raised by the library. The code lets callers (the CLI
// in particular) map failures onto exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

template <ErrorCode kCode>
class TypedError : public Error {
 public:
  explicit TypedError(const std::string& message) : Error(kCode, message) {}
};

using ShapeError = TypedError<ErrorCode::kShape>;
using ValueError = TypedError<ErrorCode::kValue>;
using ConfigError = TypedError<ErrorCode::kConfig>;
using DecodeError = TypedError<ErrorCode::kDecode>;
using EmptyCorpusError = TypedError<ErrorCode::kEmptyCorpus>;
using EmptyStreamError = TypedError<ErrorCode::kEmptyStream>;
using ContractViolation = TypedError<ErrorCode::kContractViolation>;
using DivergenceError = TypedError<ErrorCode::kDivergence>;
using IoError = TypedError<ErrorCode::kIo>;

}  // namespace oodmae

#endif  // OODMAE_ERROR_H_
