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

#include "oodmae/error.h"

namespace oodmae {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShape: return "ShapeError";
    case ErrorCode::kValue: return "ValueError";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kDecode: return "DecodeError";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpusError";
    case ErrorCode::kEmptyStream: return "EmptyStreamError";
    case ErrorCode::kContractViolation: return "ContractViolation";
    case ErrorCode::kDivergence: return "DivergenceError";
    case ErrorCode::kIo: return "IOError";
  }
  return "Error";
}

}  // namespace oodmae
