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

#ifndef FAIRAUDIT_ERROR_H_
#define FAIRAUDIT_ERROR_H_

#include <stdexcept>
#include <string>

namespace fairaudit {

// Error kinds surfaced by the library. The numeric values are mirrored by
// fa_status in the C API header and must stay in sync with it.
enum class ErrorCode {
  kInvalidArgument = 1,
  kConfig = 2,
  kEmptyText = 3,
  kSchema = 4,
  kUnknownLabel = 5,
  kIo = 6,
  kNotEnoughSamples = 7,
  kMissingExemplars = 8,
  kMissingPersona = 9,
  kAuth = 10,
  kRateLimited = 11,
  kTransport = 12,
  kOversizePrompt = 13,
  kEmptyInput = 14,
  kAllUndefined = 15,
  kMissingReference = 16,
  kInvariant = 17,
  kInterrupted = 18,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fairaudit

#endif  // FAIRAUDIT_ERROR_H_
