//
// Copyright 2026 The fairaudit Authors
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

#include "fairaudit/error.h"

namespace fairaudit {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kSchema: return "SchemaError";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kNotEnoughSamples: return "NotEnoughSamples";
    case ErrorCode::kMissingExemplars: return "MissingExemplars";
    case ErrorCode::kMissingPersona: return "MissingPersona";
    case ErrorCode::kAuth: return "AuthError";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kTransport: return "TransportError";
    case ErrorCode::kOversizePrompt: return "OversizePrompt";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kAllUndefined: return "AllUndefined";
    case ErrorCode::kMissingReference: return "MissingReference";
    case ErrorCode::kInvariant: return "InvariantViolation";
    case ErrorCode::kInterrupted: return "Interrupted";
  }
  return "Unknown";
}

}  // namespace fairaudit
